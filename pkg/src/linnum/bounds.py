"""Bounds on the admissible periods of a U-recognizable ultimately periodic set.

Primes are split into T1 (not dividing every recurrence coefficient) and T2
(dividing all of them).  T1 exponents are bounded by the automaton size; T2
exponents need valuation certificates, otherwise they are capped.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce as _fold

import mpmath
import sympy

from .langs import effective_recurrence, mod_profile

log = logging.getLogger(__name__)

LAMBDA_CAP = 64
PRIME_UNIVERSE_CAP = 1_000_000
T2_EXPONENT_CAP = 6


class NotZeroPeriod(ValueError):
    pass


class TestInequalityFails(ValueError):
    pass


class LambdaNotFound(RuntimeError):
    """No non-zero periodic residue mod ``p^lam`` up to the cap.  For a minimal
    recurrence this cannot happen for a T1 prime."""


class _CapMarker:
    def __repr__(self):
        return "CapExceeded"


CAP_EXCEEDED = _CapMarker()


@dataclass(frozen=True)
class PrimeClass:
    p: int
    kind: str  # "T1" or "T2"
    lam: int | None = None
    exponent_bound: int | str | None = None  # int, or "conditional" / "capped"


def _gcd_primes(coefficients):
    g = _fold(math.gcd, (abs(a) for a in coefficients), 0)
    return sorted(sympy.primefactors(g)) if g > 1 else []


def classify_primes(sys, effective=False):
    """T2 primes of the system, i.e. the prime factors of the coefficient gcd.

    With ``effective=True`` the shortest verified recurrence of the sequence is
    used instead of the given coefficients; the two differ when the given
    recurrence is not minimal.
    """
    coeffs = effective_recurrence(sys)[0] if effective else sys.coefficients
    return [PrimeClass(p, "T2") for p in _gcd_primes(coeffs)]


def threshold(sys):
    """``max(|a_0|, U_N)`` for the shortest verified recurrence."""
    rec, N = effective_recurrence(sys)
    return max(abs(rec[-1]), sys[N])


def lambda_for_prime(sys, p, cap=LAMBDA_CAP):
    """Least ``lam`` such that the periodic part of ``(U_i mod p^lam)`` is not all zero."""
    for lam in range(1, cap + 1):
        if not mod_profile(sys, p ** lam).zero_period:
            return lam
    raise LambdaNotFound(f"(U_i mod {p}^lam) has a zero period for every lam <= {cap}")


def f_p(sys, p, mu):
    """Length of the preperiod of the zero period of ``(U_i mod p^mu)``."""
    if mu == 0:
        return 0
    prof = mod_profile(sys, p ** mu)
    if not prof.zero_period:
        raise NotZeroPeriod(f"(U_i mod {p}^{mu}) is not ultimately zero")
    return prof.preperiod


def ilog_floor(n, p):
    """Largest ``e`` with ``p^e <= n`` (``n >= 1``)."""
    e, q = 0, p
    while q <= n:
        e += 1
        q *= p
    return e


def ilog_ceil(n, p):
    """Least ``e`` with ``p^e >= n``."""
    e, q = 0, 1
    while q < n:
        e += 1
        q *= p
    return e


def exponent_bound_t1(p, lam, S, threshold=None):
    """Largest exponent of a T1 prime ``p`` that may divide the period.

    For ``p <= threshold`` (the default when no threshold is given) the bound
    is ``max(lam, ceil(log_p S) + lam - 1)``; for larger primes ``p^mu <= S``.
    """
    if S < 1:
        raise ValueError("S must be positive")
    if threshold is None or p <= threshold:
        return max(lam, ilog_ceil(S, p) + lam - 1)
    return ilog_floor(S, p)


def big_m(sys, nu):
    """``max_j f_{p_j}(nu_j)`` for a mapping prime -> exponent."""
    return max((f_p(sys, p, e) for p, e in nu.items()), default=0)


def n_x(sys, Q, nu):
    rho = Q * math.prod(p ** e for p, e in nu.items())
    return big_m(sys, nu) - 1 - sys.length_of(rho - 1)


# -- valuation certificates -------------------------------------------------------


@dataclass(frozen=True)
class ValuationCertificate:
    """``nu_p(U_i) < floor(alpha i) + c log(i) + c'`` and ``c log(i) + c' < eps i`` for ``i > N``."""

    p: int
    alpha: Fraction
    epsilon: Fraction
    N: int
    c: float = 1.0
    c_prime: float = 0.0
    verified_to: int | None = None
    status: str = "user-asserted"  # or "verified-at-horizon"

    def g(self, i):
        return self.c * math.log(i) + self.c_prime

    def dumps(self):
        a, e = self.alpha, self.epsilon
        return (f"{self.p} {a.numerator}/{a.denominator} {e.numerator}/{e.denominator} "
                f"{self.N} {self.status} {self.c!r} {self.c_prime!r}")


def parse_certificates(text):
    """One certificate per line: ``p alpha eps N status [c c']``; ``#`` comments."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if len(line) not in (5, 7):
            raise ValueError(f"line {lineno}: expected 'p alpha eps N status [c c']'")
        p, alpha, eps, N, status = line[:5]
        extra = dict(c=float(line[5]), c_prime=float(line[6])) if len(line) == 7 else {}
        out.append(ValuationCertificate(int(p), Fraction(alpha), Fraction(eps), int(N),
                                        status=status, **extra))
    return out


def valuations(sys, p, n, precision=None):
    """``nu_p(U_i)`` for ``i < n`` through residues mod ``p^precision``; values
    reaching the precision are reported as ``precision``."""
    precision = precision or max(64, n)
    mod = p ** precision
    out = []
    for u in sys.terms_mod(mod, n - 1):
        v = 0
        while v < precision and u % p == 0:
            u //= p
            v += 1
        out.append(v)
    return out


def fit_certificate(sys, p, horizon=400, epsilon=Fraction(1, 50), c=1.0):
    """Fit ``alpha`` and ``g(i) = c log(i) + c'`` to the valuations up to ``horizon``."""
    vals = valuations(sys, p, horizon + 1)
    tail = range(horizon // 2, horizon + 1)
    # the slope of the lower envelope; spikes only push the upper side
    slope = sorted(Fraction(vals[i], i) for i in tail)[len(tail) // 4]
    alpha = slope.limit_denominator(12)
    if alpha <= 0:
        alpha = Fraction(1, 12)
    c_prime = max(vals[i] - math.floor(alpha * i) - c * math.log(i) for i in range(1, horizon + 1))
    c_prime = math.floor(c_prime * 1000 + 1) / 1000
    eps = float(epsilon)
    # g(i) < eps i from N on; eps i - c log i is increasing past c / eps
    N = max(1, math.ceil(c / eps))
    while eps * N - c * math.log(N) - c_prime <= 0:
        N += 1
    return ValuationCertificate(p, alpha, epsilon, N, c, c_prime, horizon, "verified-at-horizon")


def certificate_holds(sys, cert, upto=None):
    """Check the valuation inequality on ``1 <= i <= upto`` and ``g(i) < eps i`` past N."""
    upto = upto or cert.verified_to or 200
    vals = valuations(sys, cert.p, upto + 1)
    for i in range(1, upto + 1):
        if not vals[i] < math.floor(cert.alpha * i) + cert.g(i):
            return False
    return all(cert.g(i) < float(cert.epsilon) * i for i in range(cert.N + 1, max(upto, cert.N + 2)))


# -- conditions on the growth ---------------------------------------------------------


def _rhs_interval(params, primes):
    beta = params.beta_iv
    with mpmath.workprec(128):
        s = mpmath.iv.mpf(0)
        for p in primes:
            s += mpmath.iv.log(p) / mpmath.iv.log(beta)
        return params.u * s


def test_margin(params, certs):
    """Interval for ``1/max(alpha+eps) - u sum log_beta p``."""
    if not certs:
        raise ValueError("no certificates")
    top = max(c.alpha + c.epsilon for c in certs)
    lhs = mpmath.iv.mpf(1) / mpmath.iv.mpf(top.numerator) * top.denominator
    return lhs - _rhs_interval(params, [c.p for c in certs])


def check_test_inequality(params, certs):
    """True or False when certified by interval arithmetic, None when unresolved."""
    margin = test_margin(params, certs)
    if margin.a > 0:
        return True
    if margin.b < 0:
        return False
    return None


def constant_d(params, certs, Z, K):
    """Smallest integer at least ``(Z+K+1) / (1/max(alpha+eps) - u sum log_beta p)``."""
    if check_test_inequality(params, certs) is not True:
        raise TestInequalityFails("the growth condition does not hold (or is unresolved)")
    margin = test_margin(params, certs)
    num = mpmath.iv.mpf(Z) + mpmath.iv.mpf(K) + 1
    q = num / margin
    return max(1, int(mpmath.ceil(q.b)))


# -- the report ---------------------------------------------------------------------


@dataclass
class PeriodBoundReport:
    S: int
    threshold: int
    primes: list = field(default_factory=list)  # PrimeClass entries
    universe: dict = field(default_factory=dict)  # prime -> exponent bound
    q_bound: int = 1  # lcm of the admissible T1 parts
    D: int | None = None
    D_prime: int | None = None
    E: int | None = None
    gamma_bound: int | None = None
    complete: bool = True  # False when T2 exponents were capped
    conditional: bool = False  # True when certificates were consumed
    reason: str | None = None  # set when no bound could be produced
    notes: list = field(default_factory=list)

    @property
    def max_period(self):
        return math.prod(p ** e for p, e in self.universe.items())

    def candidate_count(self):
        return math.prod(e + 1 for e in self.universe.values())

    def describe(self):
        lines = [f"S = {self.S}", f"threshold = {self.threshold}"]
        ones = []
        for pc in self.primes:
            if pc.kind == "T1" and pc.exponent_bound == 1 and pc.lam in (None, 1):
                ones.append(pc.p)
                continue
            extra = f" lambda={pc.lam}" if pc.lam is not None else ""
            lines.append(f"prime {pc.p} {pc.kind}{extra} bound={pc.exponent_bound}")
        if ones:
            lines.append(f"primes with bound 1: {len(ones)} from {ones[0]} to {ones[-1]}")
        for key in ("q_bound", "D", "D_prime", "E", "gamma_bound"):
            lines.append(f"{key} = {getattr(self, key)}")
        lines.append(f"candidates = {self.candidate_count()}")
        lines.append(f"complete = {self.complete}")
        lines.append(f"conditional = {self.conditional}")
        if self.reason:
            lines.append(f"reason = {self.reason}")
        lines.extend(f"note = {n}" for n in self.notes)
        return "\n".join(lines)


def t1_bounds(sys, S, prime_cap=PRIME_UNIVERSE_CAP):
    """``(classes, reason)`` for every T1 prime that may divide a period."""
    t2 = {pc.p for pc in classify_primes(sys, effective=True)}
    th = threshold(sys)
    top = max(th, S)
    if top > prime_cap:
        return None, f"prime universe up to {top} exceeds the cap {prime_cap}"
    out = []
    for p in sympy.primerange(2, top + 1):
        if p in t2:
            continue
        if p <= th:
            lam = lambda_for_prime(sys, p)
            out.append(PrimeClass(p, "T1", lam, exponent_bound_t1(p, lam, S, th)))
        else:
            e = ilog_floor(S, p)
            if e:
                out.append(PrimeClass(p, "T1", None, e))
    return out, None


def _least_mu_above(sys, p, P, cap=4096):
    """Least ``mu`` with ``f_p(mu) > P``."""
    mu = 1
    while f_p(sys, p, mu) <= P:
        mu += 1
        if mu > cap:
            raise RuntimeError(f"f_{p} stays below {P} up to mu={cap}")
    return mu


def period_bounds(sys, S, lang=None, Z=None, params=None, certs=None,
                  t2_cap=T2_EXPONENT_CAP, prime_cap=PRIME_UNIVERSE_CAP, gamma_fn=None):
    """Per-prime exponent bounds for the period of a set whose padded
    representation language has a minimal automaton with ``S`` states.

    Without certificates the T2 exponents are capped at ``t2_cap`` and the
    report is marked incomplete.  ``gamma_fn(Q)`` must bound ``gamma_Q``.
    """
    rep = PeriodBoundReport(S=S, threshold=threshold(sys))
    t1, reason = t1_bounds(sys, S, prime_cap)
    if t1 is None:
        rep.reason = reason
        rep.complete = False
        return rep
    rep.primes.extend(t1)
    for pc in t1:
        rep.universe[pc.p] = pc.exponent_bound
    rep.q_bound = math.prod(pc.p ** pc.exponent_bound for pc in t1)
    given = {pc.p for pc in classify_primes(sys)}
    t2 = [pc.p for pc in classify_primes(sys, effective=True)]
    if set(t2) != given:
        rep.notes.append(f"T2 primes taken from the shortest recurrence: {t2}")
    if not t2:
        return rep

    if not certs:
        rep.complete = False
        for p in t2:
            rep.primes.append(PrimeClass(p, "T2", None, "capped"))
            rep.universe[p] = t2_cap
        rep.notes.append(f"no valuation certificates: T2 exponents capped at {t2_cap}")
        return rep

    by_prime = {c.p: c for c in certs}
    missing = [p for p in t2 if p not in by_prime]
    if missing or params is None or Z is None:
        rep.complete = False
        rep.reason = (f"missing certificates for {missing}" if missing
                      else "growth parameters or Z unavailable")
        for p in t2:
            rep.primes.append(PrimeClass(p, "T2", None, "capped"))
            rep.universe[p] = t2_cap
        return rep
    used = [by_prime[p] for p in t2]
    rep.conditional = True
    verdict = check_test_inequality(params, used)
    if verdict is not True:
        rep.complete = False
        rep.reason = "growth condition " + ("fails" if verdict is False else "unresolved")
        for p in t2:
            rep.primes.append(PrimeClass(p, "T2", None, "capped"))
            rep.universe[p] = t2_cap
        return rep
    # log_beta of the T1 part enters |rep(rho - 1)| as well
    with mpmath.workprec(128):
        extra = params.u * mpmath.log(rep.q_bound) / mpmath.log(params.beta) if rep.q_bound > 1 else 0
    K_eff = params.K + float(extra)
    D = constant_d(params, used, Z, K_eff)
    # Lemma-style growth of f_p only holds from the certificate's N on
    start = max(math.floor(c.alpha * c.N) + math.ceil(c.g(max(c.N, 1))) + 1 for c in used)
    rep.D = max(D, start)
    P = max((mod_profile(sys, p ** e).preperiod for p, e in rep.universe.items()), default=0)
    rep.D_prime = max(_least_mu_above(sys, p, P) for p in t2)
    rep.E = max(rep.D, rep.D_prime)
    gamma = gamma_fn(rep.q_bound) if gamma_fn else None
    if gamma is None:
        rep.complete = False
        rep.reason = "no bound on gamma"
        return rep
    rep.gamma_bound = gamma
    # |rep(rho - 1)| <= S gamma - 1, so rho <= U_{S gamma - 1}
    rho_max = sys[S * gamma - 1]
    mu_max = max(rep.E - 1, ilog_floor(rho_max, min(t2)))
    for p in t2:
        rep.primes.append(PrimeClass(p, "T2", None, mu_max))
        rep.universe[p] = mu_max
    return rep


def enumerate_candidate_periods(universe, cap=None):
    """Products of prime powers within the bounds, in increasing order.

    ``universe`` maps primes to exponent bounds (or is a PeriodBoundReport).
    Yields ``CAP_EXCEEDED`` and stops once the next candidate exceeds ``cap``.
    """
    if isinstance(universe, PeriodBoundReport):
        universe = universe.universe
    primes = sorted(p for p, e in universe.items() if e > 0)
    heap = [(1, (0,) * len(primes))]
    seen = {heap[0][1]}
    while heap:
        value, exps = heapq.heappop(heap)
        if cap is not None and value > cap:
            yield CAP_EXCEEDED
            return
        yield value
        for i, p in enumerate(primes):
            if exps[i] < universe[p]:
                nxt = exps[:i] + (exps[i] + 1,) + exps[i + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (value * p, nxt))


# -- lower-bound laws ---------------------------------------------------------------------


def _pattern_period(bits):
    n = len(bits)
    for d in sympy.divisors(n):
        if all(bits[i] == bits[(i + d) % n] for i in range(n)):
            return d
    return n  # pragma: no cover - n itself always works


def split_period(sys, period):
    """``(Q, {p: mu})``: the part of ``period`` prime to the T2 primes, and the T2 exponents."""
    Q, mu = period, {}
    for pc in classify_primes(sys, effective=True):
        e = 0
        while Q % pc.p == 0:
            Q //= pc.p
            e += 1
        mu[pc.p] = e
    return Q, mu


@dataclass(frozen=True)
class ReducedPeriod:
    Q: int
    r: int
    mu: dict
    nu: dict
    rho: int
    M: int


def reduced_period(sys, period, residues):
    """``(Q_X, r_X, nu, rho_X, M)`` for the eventual pattern ``n mod period in residues``.

    ``r_X`` is the least ``r`` for which the class ``X n (Q N + r)`` has T2
    exponents whose maximum equals the maximum over the period of ``X``.
    """
    Q, mu = split_period(sys, period)
    top = max(mu.values(), default=0)
    residues = set(residues)
    for r in range(Q):
        bits = [n % Q == r and n in residues for n in range(period)]
        _, nu = split_period(sys, _pattern_period(bits))
        if max(nu.values(), default=0) == top:
            rho = Q * math.prod(p ** e for p, e in nu.items())
            return ReducedPeriod(Q, r, mu, nu, rho, big_m(sys, nu))
    raise AssertionError("no class attains the largest exponent")  # contradicts Honkala's lemma


def cas2a_bound(p, lam, mu):
    """States needed when ``p^mu`` divides the period of a set (T1 prime ``p``)."""
    return p ** (mu - lam + 1) if mu >= lam else None


def main_bound(sys, rp, Z, gamma_q):
    """``(|rep(rho-1)| + 1) / gamma_Q`` when the hypotheses on ``M`` hold, else None.

    ``gamma_q`` may be a callable of ``Q``; it is only evaluated when needed.
    """
    length = sys.length_of(rp.rho - 1)
    if rp.M - 1 - length < Z:
        return None
    if rp.M <= mod_profile(sys, rp.Q).preperiod:
        return None
    g = gamma_q(rp.Q) if callable(gamma_q) else gamma_q
    return Fraction(length + 1, g)
