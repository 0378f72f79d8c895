"""Fixed-precision p-adic arithmetic and the valuation analysis of the toy system.

``PadicInt`` is a residue mod ``p^P``.  ``ExtElem`` lives in a totally
ramified extension ``Q_p(pi)`` with ``pi`` a root of an Eisenstein
polynomial: an element is ``p^-shift * sum_j coords[j] pi^j`` where the
integer coordinates are known modulo ``p^prec``.  Every operation lowers
``prec`` by what it can no longer guarantee, so the final ``prec`` is a
certified budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import sympy


class HenselConditionFails(ValueError):
    pass


class OutsideConvergenceDomain(ValueError):
    pass


class PrecisionLoss(ArithmeticError):
    pass


@dataclass(frozen=True)
class AtLeast:
    """A valuation that reached the working precision."""

    bound: int

    def __repr__(self):
        return f"≥{self.bound}"


def nu(n, p):
    """Valuation of a non-zero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    if p == 2:
        return (n & -n).bit_length() - 1
    if n % p:
        return 0
    # repeated division is quadratic on the huge residues of the peak checks
    return int(sympy.multiplicity(p, n))


def nu_mod(r, p, P):
    """Valuation of a residue mod ``p^P``; ``AtLeast(P)`` when it is 0."""
    r %= p ** P
    return AtLeast(P) if r == 0 else nu(r, p)


@dataclass(frozen=True)
class PadicInt:
    p: int
    P: int
    residue: int

    def __post_init__(self):
        object.__setattr__(self, "residue", self.residue % self.p ** self.P)

    def valuation(self):
        return nu_mod(self.residue, self.p, self.P)

    def digits(self):
        r, out = self.residue, []
        for _ in range(self.P):
            r, d = divmod(r, self.p)
            out.append(d)
        return tuple(out)


# -- sequences -----------------------------------------------------------------------


def valuation(sys, p, i, precision=64):
    """``nu_p(U_i)`` computed from ``U_i mod p^precision``."""
    return nu_mod(sys.term_mod(i, p ** precision), p, precision)


def valuations_upto(sys, p, n, precision):
    """``nu_p(U_i)`` for ``0 <= i <= n`` by one residue sweep."""
    return [nu_mod(u, p, precision) for u in sys.terms_mod(p ** precision, n)]


# -- Hensel lifting --------------------------------------------------------------------


def _poly_eval(coeffs, x, m=None):
    """``coeffs`` highest degree first."""
    acc = 0
    for c in coeffs:
        acc = acc * x + c
        if m:
            acc %= m
    return acc


def _poly_deriv(coeffs):
    n = len(coeffs) - 1
    return [c * (n - i) for i, c in enumerate(coeffs[:-1])]


def hensel_root(coeffs, p, seed, precision):
    """Root of an integer polynomial (highest degree first) near ``seed``,
    assuming ``|P(seed)|_p < |P'(seed)|_p^2``; returned mod ``p^precision``."""
    d = _poly_deriv(coeffs)
    f0, d0 = _poly_eval(coeffs, seed), _poly_eval(d, seed)
    if d0 == 0 or (f0 != 0 and nu(f0, p) <= 2 * nu(d0, p)):
        raise HenselConditionFails(f"|P({seed})| is not below |P'({seed})|^2")
    k = nu(d0, p)
    mod = p ** (precision + 2 * k + 2)
    x = seed
    # Newton: x - f(x)/f'(x); f'(x) keeps valuation k along the iteration
    for _ in range(precision.bit_length() + 4):
        fx = _poly_eval(coeffs, x, mod)
        if fx % (p ** (precision + k)) == 0:
            break
        dx = _poly_eval(d, x, mod)
        unit = dx // p ** k
        x = (x - (fx // p ** k) * pow(unit, -1, mod)) % mod
    fx = _poly_eval(coeffs, x, mod)
    if fx % (p ** (precision + k)) != 0:
        raise HenselConditionFails("Newton iteration did not converge")
    return PadicInt(p, precision, x)


# -- ramified extensions ---------------------------------------------------------------------


@dataclass(frozen=True)
class Ext:
    """``Q_p(pi)`` with ``pi`` a root of the monic Eisenstein polynomial
    ``x^e + poly[e-1] x^(e-1) + ... + poly[0]`` (``poly`` lowest degree first,
    coefficients known mod ``p^prec``)."""

    p: int
    poly: tuple
    prec: int

    @property
    def e(self):
        return len(self.poly)

    def __post_init__(self):
        p = self.p
        if self.poly[0] % p or self.poly[0] % (p * p) == 0 or any(c % p for c in self.poly[1:]):
            raise ValueError("generator polynomial is not Eisenstein")

    def elem(self, coords, shift=0, prec=None):
        coords = tuple(coords) + (0,) * (self.e - len(coords))
        return ExtElem(self, coords, shift, self.prec if prec is None else prec)

    def one(self):
        return self.elem((1,))

    def gen(self):
        return self.elem((0, 1))

    def from_int(self, n, prec=None):
        return self.elem((n,), prec=prec)


@dataclass(frozen=True)
class ExtElem:
    ring: Ext
    coords: tuple
    shift: int = 0
    prec: int = 0  # coordinates known mod p^prec

    def __post_init__(self):
        m = self.ring.p ** max(self.prec, 0)
        object.__setattr__(self, "coords", tuple(c % m for c in self.coords))

    # -- bookkeeping
    @property
    def p(self):
        return self.ring.p

    @property
    def e(self):
        return self.ring.e

    @property
    def abs_prec(self):
        """Known modulo ``p^abs_prec`` (in the base field's units)."""
        return self.prec - self.shift

    def _scaled(self, k):
        """Same value with the shift raised by ``k``."""
        pk = self.p ** k
        return ExtElem(self.ring, tuple(c * pk for c in self.coords), self.shift + k, self.prec + k)

    def normalized(self):
        x = self
        while x.shift > 0 and x.prec > 0 and all(c % x.p == 0 for c in x.coords):
            x = ExtElem(x.ring, tuple(c // x.p for c in x.coords), x.shift - 1, x.prec - 1)
        return x

    def valuation_num(self):
        """Valuation times ``e``, or ``AtLeast`` (in the same units) if zero to precision."""
        e, p = self.e, self.p
        best = None
        for j, c in enumerate(self.coords):
            if c:
                v = e * nu(c, p) + j
                best = v if best is None else min(best, v)
        if best is None or best >= e * self.prec:
            return AtLeast(e * self.abs_prec)
        return best - e * self.shift

    def valuation(self):
        v = self.valuation_num()
        return v if isinstance(v, AtLeast) else Fraction(v, self.e)

    def is_zero(self):
        return isinstance(self.valuation_num(), AtLeast)

    # -- arithmetic
    def _coerce(self, other):
        if isinstance(other, ExtElem):
            return other
        return self.ring.from_int(int(other))

    def __add__(self, other):
        o = self._coerce(other)
        a, b = self, o
        if a.shift < b.shift:
            a = a._scaled(b.shift - a.shift)
        elif b.shift < a.shift:
            b = b._scaled(a.shift - b.shift)
        prec = min(a.prec, b.prec)
        return ExtElem(self.ring, tuple(x + y for x, y in zip(a.coords, b.coords)), a.shift, prec)

    __radd__ = __add__

    def __neg__(self):
        return ExtElem(self.ring, tuple(-c for c in self.coords), self.shift, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        e = self.e
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(self.coords):
            if x:
                for j, y in enumerate(o.coords):
                    prod[i + j] += x * y
        poly = self.ring.poly
        for k in range(2 * e - 2, e - 1, -1):
            c = prod[k]
            if c:
                prod[k] = 0
                for j in range(e):
                    prod[k - e + j] -= c * poly[j]
        # both factors have integral coordinates, so errors stay in p^min(prec)
        prec = min(self.prec, o.prec, self.ring.prec)
        return ExtElem(self.ring, tuple(prod[:e]), self.shift + o.shift, prec)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result, base = self.ring.elem((1,), prec=self.prec), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def _matrix(self):
        e = self.e
        cols = []
        v = self.ring.elem((1,), prec=self.prec)
        x = ExtElem(self.ring, self.coords, 0, self.prec)
        for j in range(e):
            cols.append((x * v).coords)
            v = v * self.ring.gen()
        return sympy.Matrix(e, e, lambda i, j: cols[j][i])

    def inverse(self):
        x = self.normalized()
        if x.is_zero():
            raise ZeroDivisionError("element is zero to working precision")
        M = x._matrix()
        det = int(M.det())
        k = nu(det, x.p)
        if k >= x.prec:
            raise PrecisionLoss("norm vanishes to working precision")
        prec = x.prec - k
        mod = x.p ** prec
        unit_inv = pow(det // x.p ** k, -1, mod)
        adj = M.adjugate()
        coords = tuple(int(adj[i, 0]) * unit_inv for i in range(x.e))
        # x^{-1} = p^(shift - k) * coords
        out = ExtElem(x.ring, coords, k, prec)
        if x.shift:
            out = ExtElem(x.ring, tuple(c * x.p ** x.shift for c in out.coords), k, prec + x.shift)
        return out.normalized()

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def conjugates_equal(self, other):
        return (self - other).is_zero()

    def residue(self, P=None):
        """The base-field coordinate mod ``p^P`` when the element lies in ``Z_p``."""
        x = self.normalized()
        if x.shift:
            raise ValueError("element is not integral")
        if any(x.coords[1:]):
            raise ValueError("element is not in the base field to working precision")
        P = x.prec if P is None else P
        if P > x.prec:
            raise PrecisionLoss(f"only {x.prec} digits are certified, {P} requested")
        return x.coords[0] % x.p ** P


def _integral_small(x):
    """Integral coordinates of an element of positive valuation."""
    x = x.normalized()
    if x.shift:
        raise OutsideConvergenceDomain("element is not integral")
    return x


def padic_log(x):
    """``log_p(x)`` for ``|x - 1|_p < 1`` by the Mercator series."""
    y = _integral_small(x - 1)
    v = y.valuation_num()
    if isinstance(v, AtLeast):
        return x.ring.elem((0,), prec=y.prec)
    if v <= 0:
        raise OutsideConvergenceDomain("log needs |x - 1| < 1")
    p, e = x.p, x.e
    target = y.prec
    # term n has valuation n v/e - nu_p(n) >= n v/e - log_p(n)
    n_max = 1
    while not (n_max * v / e - math.log(n_max, p) > target + 1 and n_max > 2 * e):
        n_max += 1
    K = max(nu(n, p) for n in range(1, n_max + 1))
    acc = [0] * e
    power = y
    for n in range(1, n_max + 1):
        k = nu(n, p)
        scale = pow(n // p ** k, -1, p ** (target + K)) * p ** (K - k)
        if n % 2 == 0:
            scale = -scale
        for j in range(e):
            acc[j] += power.coords[j] * scale
        power = power * y
    # coordinates known mod p^target before the division by p^K
    return ExtElem(x.ring, tuple(acc), K, target).normalized()


def padic_exp(x):
    """``exp_p(x)`` for ``|x|_p < p^(-1/(p-1))``.

    In valuation units of ``1/e`` that is ``e * nu(x) > e / (p - 1)``; for
    ``p = 2`` and ``e = 2`` it reads ``num >= 3`` (``nu(x) >= 3/2``).
    """
    p, e = x.p, x.e
    v = x.valuation_num()
    if isinstance(v, AtLeast):
        return x.ring.elem((1,), prec=x.prec)
    if Fraction(v, e) <= Fraction(1, p - 1):
        raise OutsideConvergenceDomain("exp needs |x| < p^(-1/(p-1))")
    x = _integral_small(x)
    ring, target = x.ring, x.prec
    gap = Fraction(v, e) - Fraction(1, p - 1)
    n_max = int((target + 1) / gap) + 2
    # nu(n!) <= n/(p-1)
    K = sum(n_max // p ** j for j in range(1, n_max.bit_length() + 1))
    # work K digits deeper so the division by n! costs nothing; the coordinates
    # of x are taken as an exact representative, and |exp(x') - exp(x)| = |x' - x|
    lifted = Ext(p, x.ring.poly, target + K)
    x = lifted.elem(x.coords, prec=target + K)
    acc = [0] * e
    acc[0] = p ** K
    power = lifted.elem((1,), prec=target + K)
    fact = 1
    for n in range(1, n_max + 1):
        fact *= n
        power = power * x
        k = nu(fact, p)
        scale = pow(fact // p ** k, -1, p ** (target + K)) * p ** (K - k)
        for j in range(e):
            acc[j] += power.coords[j] * scale
    return ExtElem(ring, tuple(acc), K, target + K).normalized()


# -- the 2-adic zero of the toy system ---------------------------------------------------------


TOY_POLY = (1, -12, -6, -12)  # x^3 - 12 x^2 - 6 x - 12
TOY_INITIAL = (1, 13, 163)


@dataclass
class ZetaValue:
    precision: int
    residue: int
    certified: int  # digits guaranteed by the precision budget
    digits: tuple = field(repr=False, default=())
    blocks: tuple = field(repr=False, default=())  # l_zeta(a); None when cut by the precision
    data: dict = field(repr=False, default_factory=dict)

    def as_padic(self):
        return PadicInt(2, self.precision, self.residue)


def toy_2adic_data(W, swap=False):
    """The 2-adic objects behind zeta at working precision ``W``.

    Returns a dict with beta_1 .. beta_3, c_1 .. c_3, L and the log argument,
    all as ExtElem in ``K = Q_2(beta_2)``.  ``swap`` exchanges the labels of
    beta_2 and beta_3.
    """
    beta1 = hensel_root(list(TOY_POLY), 2, 2, W).residue
    if beta1 % 4 != 2:
        raise AssertionError("beta_1 is not 2 mod 4")
    # P(x) = (x - beta_1)(x^2 + s x + t)
    s = beta1 - 12
    t = beta1 * beta1 - 12 * beta1 - 6
    K = Ext(2, (t % 2 ** W, s % 2 ** W), W)
    b1 = K.from_int(beta1)
    b2 = K.gen()
    b3 = K.from_int(-s) - b2
    if swap:
        b2, b3 = b3, b2
    U0, U1, U2 = TOY_INITIAL
    c1 = (-U0 * b2 * b3 + U1 * (b2 + b3) - U2) / ((b2 - b1) * (b1 - b3))
    c2 = (-U0 * b3 * b1 + U1 * (b3 + b1) - U2) / ((b3 - b2) * (b2 - b1))
    c3 = (-U0 * b1 * b2 + U1 * (b1 + b2) - U2) / ((b1 - b3) * (b3 - b2))
    ratio4 = (b3 / b2) ** 4
    L = padic_log(ratio4)
    arg = -(c2 * b2) / (c3 * b3)
    return dict(K=K, beta1=b1, beta2=b2, beta3=b3, c1=c1, c2=c2, c3=c3,
                ratio4=ratio4, L=L, arg=arg)


def f1(data, x):
    """``f_1(1 + 4x) = c_2 + c_3 (beta_3/beta_2) exp(L x)`` for ``x`` in ``Z_2``."""
    d = data
    return d["c2"] + d["c3"] * d["beta3"] / d["beta2"] * padic_exp(d["L"] * x)


@lru_cache(maxsize=8)
def zeta_toy(precision=50, margin=48, swap=False):
    """``zeta = 1 + 4 log(-c_2 beta_2 / (c_3 beta_3)) / L`` mod ``2^precision``."""
    if precision < 8:
        raise ValueError("precision must be at least 8")
    W = precision + margin
    d = toy_2adic_data(W, swap)
    A = padic_log(d["arg"])
    z = 1 + 4 * A / d["L"]
    z = z.normalized()
    if z.shift or any(z.coords[1:]):
        raise PrecisionLoss("zeta did not land in Z_2 at the working precision")
    if z.prec < precision:
        raise PrecisionLoss(f"budget left {z.prec} digits, {precision} requested "
                            f"(working precision {W})")
    res = z.coords[0] % 2 ** precision
    digits = PadicInt(2, precision, res).digits()
    return ZetaValue(precision, res, z.prec, digits, block_lengths_of(digits),
                     dict(d, A=A, zeta=z))


def block_lengths_of(digits):
    """``l(a)`` for each position; None where the zero run reaches the end."""
    n = len(digits)
    out = [0] * n
    run_end = n  # first non-zero index at or after a
    for a in range(n - 1, -1, -1):
        if digits[a]:
            run_end = a
            out[a] = 0
        else:
            out[a] = None if run_end == n else run_end - a
    return tuple(out)


def block_lengths(zeta):
    return zeta.blocks


@dataclass
class BlockReport:
    C: Fraction
    D: Fraction
    checked: int
    violations: list
    longest: int

    @property
    def holds(self):
        return not self.violations


def check_block_conjecture(zeta, C=Fraction(2, 95), D=Fraction(18, 5), upto=None):
    blocks = zeta.blocks[: upto if upto is not None else len(zeta.blocks)]
    viol = [(a, l) for a, l in enumerate(blocks) if l is not None and l > C * a + D]
    known = [l for l in blocks if l is not None]
    return BlockReport(C, D, len(known), viol, max(known, default=0))


def log_upper_bound_check(zeta, C, D, n_max):
    """Check ``nu_p(n - zeta) <= (2C + D + 2) / log(p) * log(n)`` for ``p <= n <= n_max``.

    ``zeta`` is a PadicInt or ZetaValue.  Valuations reaching the precision
    count as failures, since they cannot be bounded.
    """
    if isinstance(zeta, ZetaValue):
        zeta = zeta.as_padic()
    p, P = zeta.p, zeta.P
    if not (C > 0 and D >= -(C + 1)):
        raise ValueError("need C > 0 and D >= -(C + 1)")
    k = (2 * float(C) + float(D) + 2) / math.log(p)
    for n in range(p, n_max + 1):
        v = nu_mod(n - zeta.residue, p, P)
        if isinstance(v, AtLeast) or v > k * math.log(n) + 1e-12:
            return False
    return True


def nu2_closed_form(i, zeta):
    """``floor((i-1)/2) + nu_2(i - zeta)`` if ``i = 1 mod 4``, else ``floor((i-1)/2)``."""
    if i < 10:
        raise ValueError("the formula is stated for i >= 10")
    base = (i - 1) // 2
    if i % 4 != 1:
        return base
    z = zeta.as_padic() if isinstance(zeta, ZetaValue) else zeta
    v = nu_mod(i - z.residue, 2, z.P)
    if isinstance(v, AtLeast):
        return "precision-limited"
    return base + v


def nu3_closed_form(i):
    return i // 3 + (1 if i % 9 == 4 else 0)


# period of (T_i mod 9 Z[3^(1/3)]), as coordinates (a, b, c) of a + b t + c t^2, t^3 = 3
T_PERIOD = (
    (0, 0, 1), (0, 4, 0), (1, 0, 0), (0, 0, 7), (0, 3, 0), (1, 0, 0), (0, 0, 2), (0, 2, 0), (4, 0, 0),
    (0, 0, 1), (0, 1, 0), (7, 0, 0), (0, 0, 7), (0, 3, 0), (7, 0, 0), (0, 0, 8), (0, 5, 0), (1, 0, 0),
    (0, 0, 1), (0, 7, 0), (4, 0, 0), (0, 0, 7), (0, 3, 0), (4, 0, 0), (0, 0, 5), (0, 8, 0), (7, 0, 0),
)


def t_sequence_mod9(n):
    """``T_i = U_i / 3^((i-2)/3)`` mod ``9 Z[3^(1/3)]`` for ``i < n``."""
    R = Ext(3, (-3 % 3 ** 2, 0, 0), 2)
    t = R.gen()
    coeffs = (4 * t * t, 2 * t, R.from_int(4))
    T = [t * t, 13 * t, R.from_int(163)]
    while len(T) < n:
        T.append(coeffs[0] * T[-1] + coeffs[1] * T[-2] + coeffs[2] * T[-3])
    return [x.coords for x in T[:n]]


def verify_T_period():
    seq = t_sequence_mod9(27 * 4)
    return all(seq[i] == T_PERIOD[i % 27] for i in range(len(seq)))


def valuation_peaks(sys, pairs, margin=64):
    """Check each ``(i, nu)`` pair as ``nu_2(U_i) = nu`` from ``U_i mod 2^(nu+margin)``."""
    return all(valuation(sys, 2, i, v + margin) == v for i, v in pairs)
