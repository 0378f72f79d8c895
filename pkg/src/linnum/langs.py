"""Numeration languages, residue profiles of ``(U_i mod m)`` and congruence automata."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
import sympy

from . import automata as fa
from .automata import Dfa
from .core import minimal_recurrence, dominant_root

log = logging.getLogger(__name__)

GRID_CAP = 1 << 22
WINDOW_CAP = 3_000_000


class ValidationFailed(ValueError):
    def __init__(self, message, word=None, number=None):
        super().__init__(message)
        self.word = word
        self.number = number


class BertrandCutoffExceeded(RuntimeError):
    pass


# -- residues -------------------------------------------------------------------


@dataclass(frozen=True)
class ModProfile:
    modulus: int
    preperiod: int
    period: int
    values: tuple

    def __getitem__(self, i):
        if i < self.preperiod:
            return self.values[i]
        return self.values[self.preperiod + (i - self.preperiod) % self.period]

    @property
    def periodic_part(self):
        return self.values[self.preperiod:]

    @property
    def zero_period(self):
        return all(v == 0 for v in self.periodic_part)


def mod_profile(sys, m):
    """Preperiod and period of ``(U_i mod m)``, found by the first repeated k-tuple
    from the offset on, then shrunk to the minimal preperiod."""
    if m < 1:
        raise ValueError("modulus must be positive")
    k = sys.order
    N = sys.offset
    vals = [u % m for u in sys.initial]
    coeffs = [a % m for a in sys.coefficients]
    seen = {}
    i = N
    while True:
        while len(vals) < i + k:
            j = len(vals) - k
            vals.append(sum(a * vals[j + k - 1 - t] for t, a in enumerate(coeffs)) % m)
        key = tuple(vals[i:i + k])
        if key in seen:
            start = seen[key]
            period = i - start
            break
        seen[key] = i
        i += 1
    # the scalar sequence may already be periodic before the tuple repeats
    for p in range(1, period):
        if period % p == 0 and all(vals[t] == vals[t + p] for t in range(start, start + period)):
            period = p
            break
    while start > 0 and vals[start - 1] == vals[start - 1 + period]:
        start -= 1
    return ModProfile(m, start, period, tuple(vals[: start + period]))


# -- effective recurrence -------------------------------------------------------


@lru_cache(maxsize=None)
def _effective(coefficients, initial, offset):
    from .core import NumerationSystem
    sys = NumerationSystem(coefficients, initial, offset)
    k, N = sys.order, sys.offset
    terms = sys.terms(4 * (N + k) + 16)
    best = (tuple(coefficients), N)
    for start in range(N + 1):
        rec = minimal_recurrence(terms[start:start + 2 * k + 2])
        if not rec or rec[-1] == 0 or start + len(rec) >= N + k:
            continue
        # the defect sequence satisfies the original recurrence from N on, so
        # vanishing on [start, max(N, start) + k) makes it vanish everywhere
        hi = max(N, start) + k + len(rec) + 4
        if all(terms[i + len(rec)] == sum(a * terms[i + len(rec) - 1 - j] for j, a in enumerate(rec))
               for i in range(start, hi)):
            if start + len(rec) < best[1] + len(best[0]):
                best = (tuple(rec), start)
    return best


def effective_recurrence(sys):
    """Shortest verified recurrence ``(coefficients, offset)`` for the sequence.

    This is the recurrence of the given system whenever that one is minimal.
    """
    return _effective(sys.coefficients, sys.initial, sys.offset)


# -- numeration languages ---------------------------------------------------------


@dataclass
class NumerationLanguage:
    dfa: Dfa
    provenance: str  # "user" | "bertrand" | "learned"
    validated_length: int = 0
    counted_length: int = 0

    @property
    def C(self):
        return self.dfa.n

    @property
    def heuristic(self):
        return self.provenance == "learned"


def count_by_length(dfa, max_len):
    """Number of accepted words of each length ``0..max_len`` (exact integers)."""
    delta = dfa.delta.tolist()
    vec = [0] * dfa.n
    vec[dfa.initial] = 1
    out = []
    final = dfa.final.tolist()
    for _ in range(max_len + 1):
        out.append(sum(c for c, f in zip(vec, final) if f))
        nxt = [0] * dfa.n
        for q, c in enumerate(vec):
            if c:
                for r in delta[q]:
                    nxt[r] += c
        vec = nxt
    return out


def validate_language(sys, dfa, max_value=20_000, count_length=40):
    """Check ``L(dfa) = 0^* rep_U(N)``.

    Exact for all words of length ``l`` with ``U_l <= max_value``: every padded
    greedy word of that length is accepted and the number of accepted words of
    length ``l`` equals ``U_l``.  The counts are further compared up to
    ``count_length``.  Returns ``(exact_length, count_length)``.
    """
    C = sys.alphabet_bound
    if dfa.m != C:
        raise ValidationFailed(f"language alphabet {dfa.m} differs from C_U = {C}")
    ell = 0
    while sys[ell + 1] <= max_value:
        ell += 1
    # zero orbit of the initial state
    zero_states = []
    q = dfa.initial
    for _ in range(ell + 1):
        zero_states.append(q)
        q = int(dfa.delta[q, 0])
    final = dfa.final
    delta = dfa.delta.tolist()
    for n in range(sys[ell]):
        w = sys.greedy_rep(n)
        for pad in range(ell - len(w) + 1):
            q = zero_states[pad]
            for d in w:
                q = delta[q][d]
            if not final[q]:
                word = (0,) * pad + w
                raise ValidationFailed(f"padded representation {word} of {n} rejected", word, n)
    counts = count_by_length(dfa, max(count_length, ell))
    for length, c in enumerate(counts):
        if c != sys[length]:
            bad = _first_non_greedy(sys, dfa, length) if c > sys[length] else None
            raise ValidationFailed(
                f"{c} accepted words of length {length}, expected U_{length} = {sys[length]}", bad)
    return ell, len(counts) - 1


def _first_non_greedy(sys, dfa, length):
    for w in dfa.words(min(length, 8)):
        if not sys.is_greedy(w, padded=True):
            return w
    return None


def _parry_dfa(prefix, period, m):
    """Words all of whose suffixes are lexicographically below ``prefix period^omega``."""
    seq = list(prefix) + list(period)
    loop_to = len(prefix)
    n = len(seq)
    dead = n
    trans = []
    for j in range(n):
        t = seq[j]
        row = []
        for a in range(m):
            if a < t:
                row.append(0)
            elif a == t:
                nxt = j + 1
                row.append(loop_to if nxt == n else nxt)
            else:
                row.append(dead)
        trans.append(row)
    trans.append([dead] * m)
    return fa.minimize(Dfa(m, trans, 0, list(range(n))))


class _ZBeta:
    """Exact arithmetic in ``Q[x]/(f)`` with interval floors of elements at a real root."""

    def __init__(self, f, root_iv_fn):
        self.x = sympy.Symbol("x")
        self.f = sympy.Poly(f, self.x, domain="QQ")
        self.deg = self.f.degree()
        self.root_iv = root_iv_fn

    def reduce(self, p):
        return sympy.Poly(p, self.x, domain="QQ").rem(self.f)

    def key(self, p):
        return tuple(p.all_coeffs())

    def floor(self, p, bits):
        coeffs = [Fraction(int(c.p), int(c.q)) for c in p.all_coeffs()]
        with mpmath.workprec(bits):
            b = self.root_iv(bits)
            acc = mpmath.iv.mpf(0)
            for c in coeffs:
                acc = acc * b + mpmath.iv.mpf(c.numerator) / c.denominator
            lo = int(mpmath.floor(acc.a))
            hi = int(mpmath.floor(acc.b))
        return lo if lo == hi else None


def beta_expansion_of_one(sys, cutoff=200, bits=128, retries=3):
    """Digits of the greedy (Renyi) expansion of 1 in base beta.

    Returns ``(prefix, period)``: ``period == ()`` when the expansion is finite.
    """
    rho, _, _, _, _, fcoeffs = dominant_root(sys, bits)
    x = sympy.Symbol("x")
    factor = sympy.Poly(fcoeffs, x)

    def root_iv(prec):
        from .core import certified_root
        lo, hi = certified_root(fcoeffs, rho, prec)
        return mpmath.iv.mpf([mpmath.mpf(lo.numerator) / lo.denominator,
                              mpmath.mpf(hi.numerator) / hi.denominator])

    ring = _ZBeta(factor.as_expr(), root_iv)
    r = ring.reduce(sympy.Integer(1))
    digits = []
    seen = {}
    for step in range(cutoff):
        key = ring.key(r)
        if key in seen:
            j = seen[key]
            return tuple(digits[:j]), tuple(digits[j:])
        seen[key] = step
        br = ring.reduce(r * x)
        t = None
        prec = bits
        for _ in range(retries + 1):
            t = ring.floor(br, prec)
            if t is not None:
                break
            prec *= 2
        if t is None:
            raise ArithmeticError("digit boundary not resolved after precision retries")
        digits.append(t)
        r = ring.reduce(br - t)
        if r.is_zero:
            return tuple(digits), ()
    raise BertrandCutoffExceeded(f"expansion of 1 not eventually periodic within {cutoff} digits")


def quasi_greedy(prefix, period):
    """``d*_beta(1)`` as ``(prefix, period)``."""
    if period:
        return prefix, period
    t = list(prefix)
    t[-1] -= 1
    return (), tuple(t)


def bertrand_construction(sys, cutoff=200):
    """The Parry automaton of the dominant root, without checking that the
    system is the Bertrand system of that root."""
    prefix, period = quasi_greedy(*beta_expansion_of_one(sys, cutoff))
    return _parry_dfa(prefix, period, sys.alphabet_bound)


def bertrand_dfa(sys, cutoff=200):
    prefix, period = quasi_greedy(*beta_expansion_of_one(sys, cutoff))
    # Bertrand's condition: U_i = t_1 U_{i-1} + ... + t_i U_0 + 1
    seq = list(prefix) + list(period) * (sys.horizon // max(1, len(period)) + 2)
    for i in range(1, min(sys.horizon, len(seq))):
        expect = sum(seq[j] * sys[i - 1 - j] for j in range(i)) + 1
        if expect != sys[i]:
            raise ValidationFailed(
                f"system is not the Bertrand system of beta: U_{i} = {sys[i]}, expected {expect}")
    return _parry_dfa(prefix, period, sys.alphabet_bound)


def _slack_vector(U, word, depth):
    """``tau_j`` for ``j <= depth``: how many suffixes of length ``j`` keep the
    padded word greedy, i.e. ``min(U_j, U_{|x|+j} - val(x 0^j))`` over the
    suffixes ``x`` of ``word``, clamped at 0."""
    ell = len(word)
    out = []
    for j in range(depth + 1):
        best = U[j]
        v = 0
        for t in range(ell):
            # x = word[ell-1-t:], |x| = t + 1
            v += word[ell - 1 - t] * U[t + j]
            best = min(best, U[t + 1 + j] - v)
        out.append(max(best, 0))
    return tuple(out)


def learned_dfa(sys, depth=24, cap=2_000):
    """Automaton whose states are residual classes of padded greedy prefixes,
    told apart by their slack vectors ``tau_0..tau_depth``.

    Two prefixes with the same residual have the same vector; distinct
    residuals that agree up to ``depth`` are merged, so the result must be
    validated.
    """
    C = sys.alphabet_bound
    start = ()
    index = {}
    reps = []
    trans = []
    sink = -1

    def lookup(word):
        key = _slack_vector(U, word, depth)
        if not any(key):
            return sink, key
        i = index.get(key)
        if i is None:
            if len(reps) >= cap:
                raise fa.StateBlowup(f"learned language exceeded {cap} states")
            i = index[key] = len(reps)
            reps.append((word, key))
        return i, key

    U = sys.terms(depth + 2 + 64)
    lookup(start)
    i = 0
    while i < len(reps):
        word, _ = reps[i]
        if len(word) + depth + 2 >= len(U):
            U = sys.terms(len(word) + depth + 66)
        trans.append([lookup(word + (d,))[0] for d in range(C)])
        i += 1
    n = len(reps)
    trans = [[n if r < 0 else r for r in row] for row in trans] + [[n] * C]
    # a prefix need not be greedy itself to extend to a greedy word
    return fa.minimize(Dfa(C, trans, 0, [i for i, (_, t) in enumerate(reps) if t[0] >= 1]))


def numeration_dfa(sys, source="bertrand", dfa=None, max_value=20_000, count_length=40,
                   cutoff=200, depth=24):
    """Build and validate a DFA for ``0^* rep_U(N)``.

    ``source`` is ``"bertrand"``, ``"learn"`` or ``"user"`` (with ``dfa``).
    """
    if source == "user":
        if dfa is None:
            raise ValueError("user source needs a dfa")
        cand, prov = fa.minimize(dfa), "user"
    elif source == "bertrand":
        cand, prov = bertrand_dfa(sys, cutoff), "bertrand"
    elif source == "learn":
        cand, prov = learned_dfa(sys, depth), "learned"
    else:
        raise ValueError(f"unknown language source {source!r}")
    exact, counted = validate_language(sys, cand, max_value, count_length)
    return NumerationLanguage(cand, prov, exact, counted)


def default_language(sys, **kw):
    """Bertrand when it applies, otherwise the learned construction."""
    try:
        return numeration_dfa(sys, "bertrand", **kw)
    except (ValidationFailed, BertrandCutoffExceeded, ArithmeticError) as exc:
        log.info("bertrand construction unavailable (%s); learning the language", exc)
        return numeration_dfa(sys, "learn", **kw)


# -- congruence machines ------------------------------------------------------------


@dataclass
class ResidueMachine:
    """Deterministic machine whose state after reading ``w`` (MSDF, any digits
    below ``m``) determines ``val_U(w) mod Q``, given by ``residue[state]``."""

    dfa: Dfa  # accepting set unused
    residue: np.ndarray
    modulus: int


def residue_machine(sys, Q, m=None, cap=WINDOW_CAP):
    """The window construction.

    With ``V_j = val_U(p 0^j)`` for a prefix ``p``, the state is
    ``(V_0, ..., V_{K-1}) mod Q`` where ``K = N + k`` for the shortest verified
    recurrence; appending digit ``d`` maps ``V_j`` to ``V_{j+1} + d U_j`` and
    ``V_K`` follows from the recurrence.
    """
    return _residue_machine(sys.coefficients, sys.initial, sys.offset,
                            sys.alphabet_bound if m is None else m, Q, cap)


@lru_cache(maxsize=64)
def _residue_machine(coefficients, initial, offset, m, Q, cap):
    from .core import NumerationSystem
    sys = NumerationSystem(coefficients, initial, offset)
    rec, N = effective_recurrence(sys)
    k = len(rec)
    K = N + k
    U = [u % Q for u in sys.terms(K)]
    if Q == 1:
        return ResidueMachine(Dfa(m, [[0] * m], 0, []), np.zeros(1, dtype=np.int64), 1)
    if Q ** K <= GRID_CAP:
        size = Q ** K
        codes = np.arange(size, dtype=np.int64)
        W = [(codes // Q ** j) % Q for j in range(K)]  # W[j] = V_j
        nxt = np.zeros(size, dtype=np.int64)
        for t, a in enumerate(rec):
            nxt = (nxt + (a % Q) * W[K - 1 - t]) % Q
        ext = W[1:] + [nxt]
        delta = np.zeros((size, m), dtype=np.int64)
        for d in range(m):
            code = np.zeros(size, dtype=np.int64)
            for j in range(K - 1, -1, -1):
                code = code * Q + (ext[j] + d * U[j]) % Q
            delta[:, d] = code
        order, _, _ = fa.bfs_order(delta, 0)
        index = np.full(size, -1, dtype=np.int64)
        index[order] = np.arange(order.size)
        res = W[0][order]
        return ResidueMachine(Dfa(m, index[delta[order]], 0, [], check=False), res, Q)
    # sparse exploration
    start = (0,) * K
    index = {start: 0}
    states = [start]
    trans = []
    for Wt in states:
        nv = sum(a * Wt[K - 1 - t] for t, a in enumerate(rec)) % Q
        ext = Wt[1:] + (nv,)
        row = []
        for d in range(m):
            W2 = tuple((ext[j] + d * U[j]) % Q for j in range(K))
            i = index.get(W2)
            if i is None:
                if len(states) >= cap:
                    raise fa.StateBlowup(f"residue machine mod {Q} exceeded {cap} states")
                i = index[W2] = len(states)
                states.append(W2)
            row.append(i)
        trans.append(row)
    res = np.array([s[0] for s in states], dtype=np.int64)
    return ResidueMachine(Dfa(m, trans, 0, []), res, Q)


def residue_product(lang_dfa, rm, cap=None):
    """Product of a language automaton with a residue machine: ``(pa, residues, delta)``."""
    pa, pb, delta = fa.product_states(lang_dfa, rm.dfa, cap)
    return pa, rm.residue[pb], delta


def congruence_dfa(sys, Q, r, lang, cap=None):
    """Minimal DFA for ``{w in L(lang) : val_U(w) = r mod Q}``."""
    if not 0 <= r < Q:
        raise ValueError("need 0 <= r < Q")
    ld = lang.dfa if isinstance(lang, NumerationLanguage) else lang
    rm = residue_machine(sys, Q, ld.m)
    pa, res, delta = residue_product(ld, rm, cap)
    return fa.minimize(Dfa(ld.m, delta, 0, ld.final[pa] & (res == r), check=False))


def congruence_dfa_lsdf(sys, Q, r, lang, cap=fa.DEFAULT_SUBSET_CAP):
    """Same language through a least-significant-digit-first machine, reversed and
    determinized.  Independent of the window construction; used as a cross-check."""
    ld = lang.dfa if isinstance(lang, NumerationLanguage) else lang
    prof = mod_profile(sys, Q)
    span = prof.preperiod + prof.period
    m = ld.m
    # state (position class i, partial value v); reading digit d at position i
    nfa = fa.Nfa(m, span * Q, [0], [i * Q + r for i in range(span)])
    for i in range(span):
        ni = i + 1 if i + 1 < span else prof.preperiod
        for v in range(Q):
            for d in range(m):
                nfa.add(i * Q + v, d, ni * Q + (v + d * prof[i]) % Q)
    msdf = fa.reverse_determinize(nfa, cap)
    return fa.minimize(fa.intersect(ld, msdf))


def gamma(sys, Q, lang, cap=WINDOW_CAP):
    """``gamma_Q``: the largest minimal automaton among the Q residue classes."""
    ld = lang.dfa if isinstance(lang, NumerationLanguage) else lang
    if Q == 1:
        return fa.minimize(ld).n
    rm = residue_machine(sys, Q, ld.m, cap)
    pa, res, delta = residue_product(ld, rm, cap)
    best = 0
    for r in range(Q):
        d = fa.minimize(Dfa(ld.m, delta, 0, ld.final[pa] & (res == r), check=False))
        best = max(best, d.n)
    return best


def gamma_upper(sys, Q, lang, cap=WINDOW_CAP):
    """An upper bound on ``gamma_q`` for every divisor ``q`` of ``Q``.

    The product with the residue machine is minimized once as a Moore machine
    whose output is the residue on accepting states.  Each class language mod
    a divisor of ``Q`` is a union of outputs, so its minimal DFA is a quotient.
    """
    ld = lang.dfa if isinstance(lang, NumerationLanguage) else lang
    if Q == 1:
        return fa.minimize(ld).n
    rm = residue_machine(sys, Q, ld.m, cap)
    pa, res, delta = residue_product(ld, rm, cap)
    labels = np.where(ld.final[pa], res + 1, 0)
    return int(fa._refine(delta, labels).max()) + 1
