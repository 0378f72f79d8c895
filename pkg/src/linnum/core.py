"""Linear numeration systems: exact sequence terms, greedy representations,
the (H2)/(H3) gap checks and the growth parameters used by the length bounds.
"""

from __future__ import annotations

import bisect
import logging
import math
import threading
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import sympy
from mpmath.libmp import MPZ

log = logging.getLogger(__name__)

Word = tuple[int, ...]

BETA_BITS = 128


class NotIncreasing(ValueError):
    pass


class NoDominantRoot(ValueError):
    pass


class H3ViolatedBeyondCandidate(ValueError):
    pass


class NumerationSystem:
    """A sequence ``U`` with ``U_0 = 1`` ruled by a homogeneous linear
    recurrence from index ``offset`` on.

    ``coefficients`` lists ``a_{k-1}, ..., a_0`` so that
    ``U_{i+k} = a_{k-1} U_{i+k-1} + ... + a_0 U_i`` for ``i >= offset``.
    ``initial`` holds ``U_0 .. U_{offset+k-1}``.

    Terms are memoized; the cache only ever grows and is guarded by a lock,
    so an instance can be shared between threads.
    """

    def __init__(self, coefficients, initial, offset=0, alphabet_bound=None,
                 G=None, horizon=60, name=None):
        self.coefficients = tuple(int(a) for a in coefficients)
        self.offset = int(offset)
        self.initial = tuple(int(u) for u in initial)
        self.name = name
        self.G = G
        self.horizon = int(horizon)
        k = len(self.coefficients)
        if k < 1:
            raise ValueError("recurrence needs at least one coefficient")
        if self.coefficients[-1] == 0:
            raise ValueError("a_0 must be non-zero")
        if self.offset < 0:
            raise ValueError("offset must be non-negative")
        if len(self.initial) != self.offset + k:
            raise ValueError(
                f"expected {self.offset + k} initial terms, got {len(self.initial)}")
        if self.initial[0] != 1:
            raise ValueError("U_0 must be 1")
        self._terms = list(self.initial)
        self._lock = threading.Lock()
        for i in range(len(self._terms) - 1):
            if self._terms[i + 1] <= self._terms[i]:
                raise NotIncreasing(f"U_{i + 1} = {self._terms[i + 1]} <= U_{i} = {self._terms[i]}")
        self._alphabet_override = alphabet_bound
        self._alphabet = None
        self.alphabet_stable = True

    @property
    def order(self):
        return len(self.coefficients)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return (f"<NumerationSystem{label} coeffs={list(self.coefficients)} "
                f"offset={self.offset} initial={list(self.initial)}>")

    def __eq__(self, other):
        return (isinstance(other, NumerationSystem)
                and self.coefficients == other.coefficients
                and self.offset == other.offset
                and self.initial == other.initial)

    def __hash__(self):
        return hash((self.coefficients, self.offset, self.initial))

    # -- sequence -----------------------------------------------------------

    def extend(self, n):
        """Materialize terms up to ``U_n`` (inclusive)."""
        if n < len(self._terms):
            return
        with self._lock:
            terms = self._terms
            k = self.order
            coeffs = self.coefficients
            while len(terms) <= n:
                i = len(terms) - k
                nxt = 0
                for j, a in enumerate(coeffs):
                    nxt += a * terms[i + k - 1 - j]
                if nxt <= terms[-1]:
                    raise NotIncreasing(
                        f"U_{len(terms)} = {nxt} <= U_{len(terms) - 1} = {terms[-1]}")
                terms.append(nxt)

    def terms(self, n):
        """Return ``[U_0, ..., U_n]``."""
        if n < 0:
            raise ValueError("n must be non-negative")
        self.extend(n)
        return self._terms[: n + 1]

    def __getitem__(self, i):
        self.extend(i)
        return self._terms[i]

    def terms_mod(self, m, n):
        """``[U_0 mod m, ..., U_n mod m]`` using residue arithmetic only."""
        k = self.order
        out = [u % m for u in self.initial[: n + 1]]
        coeffs = [a % m for a in self.coefficients]
        while len(out) <= n:
            i = len(out) - k
            s = 0
            for j, a in enumerate(coeffs):
                s += a * out[i + k - 1 - j]
            out.append(s % m)
        return out

    def term_mod(self, i, m):
        """``U_i mod m`` by a companion-matrix power, for large ``i``."""
        if i < len(self.initial):
            return self.initial[i] % m
        k = self.order
        # state vector (U_j, ..., U_{j+k-1}) with j = offset
        shift = i - self.offset
        base = [u % m for u in self.initial[self.offset:]]
        # coefficient vector c with U_{j+shift} = sum c_t U_{j+t}: x^shift mod charpoly
        poly = _xpow_mod(shift, self.coefficients, m)
        return sum(c * u for c, u in zip(poly, base)) % m

    # -- alphabet -----------------------------------------------------------

    @property
    def alphabet_bound(self):
        """``C_U``: digits of greedy words lie in ``0 .. C_U - 1``."""
        if self._alphabet_override is not None:
            return int(self._alphabet_override)
        if self._alphabet is None:
            self._alphabet = self._compute_alphabet(self.horizon)
        return self._alphabet

    def _compute_alphabet(self, horizon):
        u = self.terms(horizon + 1)
        ratios = [-(-u[i + 1] // u[i]) for i in range(horizon + 1)]
        window = max(2 * self.order, 4)
        tail = ratios[-window:]
        # the sup must be reached early and the tail must not creep up on it
        self.alphabet_stable = len(set(tail)) <= self.order and max(tail) <= max(ratios[:-window] or tail)
        if not self.alphabet_stable:
            log.warning("alphabet bound for %r did not stabilize by index %d", self, horizon)
        return max(ratios)

    # -- representations ----------------------------------------------------

    def length_of(self, n):
        """``|rep_U(n)|``: the least ``l`` with ``n < U_l``."""
        if n < 0:
            raise ValueError("n must be non-negative")
        while self._terms[-1] <= n:
            self.extend(len(self._terms) + 8)
        return bisect.bisect_right(self._terms, n)

    def greedy_rep(self, n):
        """Greedy representation of ``n``, most significant digit first."""
        ell = self.length_of(n)
        digits = []
        for i in range(ell - 1, -1, -1):
            q, n = divmod(n, self._terms[i])
            digits.append(q)
        return tuple(digits)

    def value_of(self, word):
        ell = len(word)
        if ell == 0:
            return 0
        self.extend(ell - 1)
        terms = self._terms
        return sum(d * terms[ell - 1 - j] for j, d in enumerate(word) if d)

    def is_greedy(self, word, padded=False):
        """True iff ``word`` is the greedy representation of its value.

        With ``padded`` set, leading zeros are allowed and stripped first.
        """
        word = tuple(word)
        if padded:
            j = 0
            while j < len(word) and word[j] == 0:
                j += 1
            word = word[j:]
        if word and word[0] == 0:
            return False
        ell = len(word)
        self.extend(ell)
        terms = self._terms
        acc = 0
        for t in range(ell):
            acc += word[ell - 1 - t] * terms[t]
            if acc >= terms[t + 1]:
                return False
        return True

    def padded_rep(self, n, length):
        w = self.greedy_rep(n)
        if len(w) > length:
            raise ValueError(f"rep({n}) longer than {length}")
        return (0,) * (length - len(w)) + w

    # -- characteristic polynomial -------------------------------------------

    def char_poly(self):
        """Integer coefficients of ``x^k - a_{k-1} x^{k-1} - ... - a_0``, leading first."""
        return [1] + [-a for a in self.coefficients]

    def minimality_warnings(self):
        """Heuristic checks that the recurrence is minimal for this sequence."""
        x = sympy.Symbol("x")
        p = sympy.Poly(self.char_poly(), x)
        _, factors = sympy.factor_list(p)
        notes = []
        if len(factors) > 1 or any(m > 1 for _, m in factors):
            notes.append("characteristic polynomial factors over Q: "
                         + " * ".join(f"({f.as_expr()})^{m}" for f, m in factors))
        rec = minimal_recurrence(self.terms(4 * self.order + 2 * self.offset + 8))
        if rec is not None and len(rec) < self.order:
            notes.append(f"sequence satisfies a shorter recurrence of order {len(rec)}: {rec}")
        return notes


def _xpow_mod(e, coeffs, m):
    """Coefficients (c_0..c_{k-1}) of x^e modulo the characteristic polynomial, mod m."""
    k = len(coeffs)
    # mpmath's integer type is gmpy2's mpz when that is installed, else int
    m = MPZ(m)
    # x^k = sum_{j} a_j x^j  with a_j = coeffs[k-1-j]
    low = [MPZ(coeffs[k - 1 - j]) % m for j in range(k)]
    if m & (m - 1) == 0:
        mask = m - 1  # powers of two (the 2-adic sweeps): a mask instead of a division
        red = lambda c: c & mask
    else:
        red = lambda c: c % m

    def mulmod(p, q):
        prod = [0] * (2 * k - 1)
        for i, pi in enumerate(p):
            if pi:
                for j, qj in enumerate(q):
                    prod[i + j] += pi * qj
        for d in range(2 * k - 2, k - 1, -1):
            c = red(prod[d])
            if c:
                for j in range(k):
                    prod[d - k + j] += c * low[j]
            prod[d] = 0
        return [red(c) for c in prod[:k]]

    result = [1 % m] + [0] * (k - 1)
    base = [0] * k
    if k == 1:
        base[0] = low[0]
    else:
        base[1] = 1 % m
    while e:
        if e & 1:
            result = mulmod(result, base)
        e >>= 1
        if e:
            base = mulmod(base, base)
    return [int(c) for c in result]


def minimal_recurrence(seq):
    """Berlekamp-Massey over Q. Returns ``[a_{k-1}, ..., a_0]`` or None.

    Only recurrences that are homogeneous from index 0 are detected.
    """
    seq = [Fraction(s) for s in seq]
    C = [Fraction(1)]
    B = [Fraction(1)]
    L = 0
    m = 1
    b = Fraction(1)
    for n in range(len(seq)):
        d = seq[n]
        for i in range(1, L + 1):
            d += C[i] * seq[n - i]
        if d == 0:
            m += 1
            continue
        T = C[:]
        coef = d / b
        C = C + [Fraction(0)] * (len(B) + m - len(C))
        for i, bi in enumerate(B):
            C[i + m] -= coef * bi
        if 2 * L <= n:
            L = n + 1 - L
            B = T
            b = d
            m = 1
        else:
            m += 1
    if 2 * L >= len(seq):
        return None
    rec = [-c for c in C[1:L + 1]]
    rec += [Fraction(0)] * (L - len(rec))
    if any(r.denominator != 1 for r in rec):
        return None
    return [int(r) for r in rec]


# -- hypotheses ---------------------------------------------------------------


@dataclass
class HypothesisReport:
    horizon: int
    h2_verified_to: int | None
    h3_candidate_G: int | None
    G_from_input: bool
    R: int | None
    C: int | None = None
    gaps: list = field(default_factory=list, repr=False)

    @property
    def Z(self):
        if self.R is None or self.C is None:
            return None
        return max(self.R, self.C)

    @property
    def h3_verified(self):
        return self.h3_candidate_G is not None

    def with_C(self, C):
        return HypothesisReport(self.horizon, self.h2_verified_to, self.h3_candidate_G,
                                self.G_from_input, self.R, C, self.gaps)


def check_hypotheses(sys, horizon=None, C=None, strict=False):
    """Check (H2) and (H3) on ``U_0 .. U_horizon+1`` and derive ``R`` (and ``Z``).

    ``G`` comes from the system when supplied, otherwise it is the least
    index from which the gaps stay non-decreasing up to the horizon; a
    candidate in the second half of the window is rejected as unverified.
    """
    horizon = horizon or sys.horizon
    if horizon < sys.offset + sys.order:
        raise ValueError("horizon must be at least offset + order")
    u = sys.terms(horizon + 1)
    gaps = [u[i + 1] - u[i] for i in range(horizon + 1)]

    # (H2): the running maximum keeps growing in the second half
    half = len(gaps) // 2
    h2 = horizon if max(gaps[half:]) > max(gaps[:half]) else None

    def nondecreasing_from(g):
        return all(gaps[i] <= gaps[i + 1] for i in range(g, len(gaps) - 1))

    from_input = sys.G is not None
    if from_input:
        G = int(sys.G)
        if not nondecreasing_from(G):
            raise H3ViolatedBeyondCandidate(f"supplied G={G} contradicted before index {horizon}")
    else:
        G = len(gaps) - 1
        while G > 0 and gaps[G - 1] <= gaps[G]:
            G -= 1
        if G > horizon // 2:
            G = None
    if G is None:
        if strict:
            raise H3ViolatedBeyondCandidate(f"no stable G up to horizon {horizon}")
        return HypothesisReport(horizon, h2, None, from_input, None, C, gaps)
    R = None
    running = max(gaps[: G + 1])
    for r in range(G, len(gaps)):
        running = max(running, gaps[r])
        if gaps[r] >= running:
            R = r
            break
    return HypothesisReport(horizon, h2, G, from_input, R, C, gaps)


# -- growth parameters -----------------------------------------------------


@dataclass(frozen=True)
class SoittolaParams:
    u: int
    beta: mpmath.mpf
    beta_interval: tuple  # (Fraction lo, Fraction hi) certified enclosure
    d: int
    K: float
    L: float
    T: int
    I: int
    root: mpmath.mpf  # dominant real root, beta = root**u

    @property
    def beta_iv(self):
        lo, hi = self.beta_interval
        return mpmath.iv.mpf([mpmath.mpf(lo.numerator) / lo.denominator,
                              mpmath.mpf(hi.numerator) / hi.denominator])


def _eval_int_poly(coeffs, x):
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _irreducible_factors(poly):
    """Factorization over Q as ``[(factor_coeffs, multiplicity), ...]``."""
    x = sympy.Symbol("x")
    _, parts = sympy.factor_list(sympy.Poly(poly, x))
    return [([int(c) for c in f.all_coeffs()], m) for f, m in parts]


def certified_root(poly, approx, bits=BETA_BITS):
    """Rational bracket ``(lo, hi)`` of width ``2**-bits`` around a simple real root."""
    with mpmath.workprec(bits + 64):
        x = mpmath.mpf(approx)
        dp = [c * (len(poly) - 1 - i) for i, c in enumerate(poly[:-1])]
        for _ in range(200):
            fx = mpmath.polyval(poly, x)
            dfx = mpmath.polyval(dp, x)
            if dfx == 0:
                break
            step = fx / dfx
            x -= step
            if abs(step) < mpmath.mpf(2) ** (-(bits + 32)):
                break
        scale = 1 << bits
        center = int(mpmath.nint(x * scale))
    for width in range(1, 64):
        lo = Fraction(center - width, scale)
        hi = Fraction(center + width, scale)
        flo = _eval_int_poly(poly, lo)
        fhi = _eval_int_poly(poly, hi)
        if flo == 0:
            return lo, lo
        if fhi == 0:
            return hi, hi
        if (flo < 0) != (fhi < 0):
            return lo, hi
    raise ArithmeticError("could not bracket root")


def dominant_root(sys, bits=BETA_BITS):
    """Largest real root of the characteristic polynomial.

    Returns ``(rho, multiplicity, (lo, hi), roots, max_modulus, factor)`` where
    ``factor`` is the irreducible factor vanishing at ``rho``.
    """
    poly = sys.char_poly()
    with mpmath.workprec(bits + 64):
        roots = mpmath.polyroots(poly, maxsteps=400, extraprec=2 * bits)
    real = [r.real for r in roots if abs(r.imag) < mpmath.mpf(10) ** -20]
    if not real:
        raise NoDominantRoot("characteristic polynomial has no real root")
    rho = max(real)
    if rho <= 1:
        raise NoDominantRoot(f"dominant real root {mpmath.nstr(rho, 8)} <= 1")
    best = None
    with mpmath.workprec(bits + 64):
        for factor, m in _irreducible_factors(poly):
            val = abs(mpmath.polyval(factor, rho))
            scale = max(abs(c) for c in factor) * (abs(rho) + 1) ** (len(factor) - 1)
            if best is None or val / scale < best[0]:
                best = (val / scale, factor, m)
    _, factor, mult = best
    bracket = certified_root(factor, rho, bits)
    moduli = [abs(r) for r in roots]
    return rho, mult, bracket, roots, max(moduli), factor


def _ratio_period(sys, rho, d, horizon, candidates):
    """Smallest u among candidates with U_{u(i+1)+r}/U_{ui+r} ~ rho**u for all r."""
    u_terms = sys.terms(horizon)
    for u in candidates:
        target = rho ** u
        ok = True
        for r in range(u):
            idx = [u * i + r for i in range(horizon // u + 1) if u * i + r <= horizon]
            a, b = idx[-2], idx[-1]
            ratio = mpmath.mpf(u_terms[b]) / u_terms[a]
            # a polynomial factor i^d converges like 1 + d/i
            tol = mpmath.mpf(4 * d + 1) / (b // u + 1) if d else mpmath.mpf("0.05")
            if abs(ratio / target - 1) > tol:
                ok = False
                break
        if ok:
            return u
    return None


def soittola_params(sys, horizon=None, bits=BETA_BITS, n_test=10_000):
    """Estimate ``u``, ``beta``, ``d``, ``T`` and fit length-bound constants ``K`` and ``L``."""
    return _soittola_params(sys, horizon or max(sys.horizon, 40), bits, n_test)


@lru_cache(maxsize=32)
def _soittola_params(sys, horizon, bits, n_test):
    rho, mult, bracket, roots, top, _ = dominant_root(sys, bits)
    # dominant roots on the circle |z| = top
    tol = mpmath.mpf(10) ** -12
    dominant = [r for r in roots if abs(abs(r) - top) < tol * top]
    u_cand = 1
    for r in dominant:
        frac = mpmath.arg(r) / (2 * mpmath.pi)
        q = Fraction(float(frac)).limit_denominator(64)
        if abs(frac - mpmath.mpf(q.numerator) / q.denominator) < 1e-9:
            u_cand = math.lcm(u_cand, q.denominator)
    if abs(rho - top) > tol * top:
        # the real root is not of maximal modulus: accept if the sequence still grows like rho
        log.warning("real root %s is not of maximal modulus %s", mpmath.nstr(rho, 6), mpmath.nstr(top, 6))
    divisors = [v for v in range(1, u_cand + 1) if u_cand % v == 0]
    d = mult - 1
    u = _ratio_period(sys, rho, d, horizon, divisors)
    if u is None:
        u = u_cand
    beta = rho ** u
    lo, hi = bracket
    beta_interval = (lo ** u, hi ** u)

    u_terms = sys.terms(horizon)
    # T: residue class with the largest leading coefficient
    best = None
    T = 0
    for r in range(u):
        i = (horizon - r) // u
        c = mpmath.mpf(u_terms[u * i + r]) / (mpmath.mpf(max(i, 1)) ** d * beta ** i)
        if best is None or c > best:
            best, T = c, r
    K, L = _fit_length_constants(sys, u, beta, d, horizon)
    params = SoittolaParams(u=u, beta=beta, beta_interval=beta_interval, d=d,
                            K=K, L=L, T=T, I=sys.offset + sys.order, root=rho)
    bad = verify_length_bounds(sys, params, n_test)
    if bad is not None:
        raise ArithmeticError(f"fitted length bounds fail at n={bad}")
    return params


def _lower_correction(u, beta, d, K, x):
    # P_T(y) is only known up to a constant, modelled as y**d (constant absorbed in L)
    if d == 0:
        return 0.0
    y = max(x + K / u, 1.0)
    return u * d * math.log(y) / math.log(beta)


def _fit_length_constants(sys, u, beta, d, horizon):
    b = float(beta)
    lb = math.log(b)
    terms = sys.terms(horizon + 1)
    K = 0.0
    for ell in range(1, horizon + 1):
        n = terms[ell - 1]  # shortest n of length ell
        K = max(K, ell - u * math.log(n) / lb)
    K = math.ceil((K + 1e-9) * 1000) / 1000 + 0.001
    L = 0.0
    for ell in range(1, horizon + 1):
        n = terms[ell] - 1  # largest n of length ell
        x = math.log(n) / lb
        L = max(L, u * x - _lower_correction(u, b, d, K, x) - ell)
    L = math.ceil((L + 1e-9) * 1000) / 1000 + 0.001
    return K, L


def length_upper(params, n):
    return params.u * math.log(n) / math.log(float(params.beta)) + params.K


def length_lower(params, n):
    b = float(params.beta)
    x = math.log(n) / math.log(b)
    return params.u * x - _lower_correction(params.u, b, params.d, params.K, x) - params.L


def verify_length_bounds(sys, params, n_max):
    """First ``n`` in ``1..n_max`` violating either bound, else None."""
    ell = 0
    nxt = 1
    for n in range(1, n_max + 1):
        if n >= nxt:
            ell = sys.length_of(n)
            nxt = sys[ell]
        if not (length_lower(params, n) < ell < length_upper(params, n)):
            return n
    return None
