"""Deciding whether a U-recognizable set is ultimately periodic.

The input DFA is closed under leading zeros first.  A period ``pi`` is tested
exactly: inside each residue class mod ``pi`` membership must be eventually
constant, i.e. the accepted or the rejected side of the class is finite.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import sympy

from . import automata as fa
from .automata import Dfa
from .bounds import (PeriodBoundReport, fit_certificate, period_bounds, classify_primes)
from .core import check_hypotheses, soittola_params, NoDominantRoot
from .langs import (WINDOW_CAP, NumerationLanguage, default_language, effective_recurrence,
                    gamma, gamma_upper, residue_machine)

log = logging.getLogger(__name__)

UP = "UltimatelyPeriodic"
NOT_UP = "NotUltimatelyPeriodic"
INCONCLUSIVE = "Inconclusive"


class NotSubsetOfNumerationLanguage(ValueError):
    def __init__(self, word):
        super().__init__(f"word {''.join(map(str, word))} is not a padded greedy representation")
        self.word = word


@dataclass(frozen=True)
class UpSetSpec:
    """``X = E  u  {n >= a : n mod period in residues}``; ``E`` lies below ``a``."""

    preperiod: int
    period: int
    residues: frozenset
    exceptions: frozenset = frozenset()

    def __post_init__(self):
        if self.period < 1 or self.preperiod < 0:
            raise ValueError("bad period or preperiod")
        if any(not 0 <= r < self.period for r in self.residues):
            raise ValueError("residue out of range")
        if any(not 0 <= e < self.preperiod for e in self.exceptions):
            raise ValueError("exceptions must lie below the preperiod")

    def __contains__(self, n):
        if n < self.preperiod:
            return n in self.exceptions
        return n % self.period in self.residues

    def bits(self, n_max):
        return [int(n in self) for n in range(n_max + 1)]


@dataclass
class DecideConfig:
    t2_cap: int = 6
    period_cap: int = 20_000  # largest period tested directly
    state_cap: int = 2_000_000
    oracle_n: int = 2048
    max_guesses: int = 8
    family_budget: int = 200
    orbit_cap: int = 5_000
    prime_cap: int = 1_000_000
    witness_cap: int = 20_000  # largest preperiod for which exceptions are listed
    self_check: bool = True


@dataclass
class Verdict:
    outcome: str
    witness: UpSetSpec | None = None
    report: PeriodBoundReport | None = None
    tested: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def period(self):
        return self.witness.period if self.witness else None

    @property
    def preperiod(self):
        return self.witness.preperiod if self.witness else None

    def machine(self, config=None):
        w = self.witness
        lines = [f"outcome={self.outcome}",
                 f"period={w.period if w else ''}",
                 f"preperiod={w.preperiod if w else ''}",
                 f"residues={','.join(map(str, sorted(w.residues))) if w else ''}",
                 f"exceptions={','.join(map(str, sorted(w.exceptions))) if w else ''}",
                 f"flags={','.join(self.flags)}",
                 f"tested={','.join(map(str, self.tested))}"]
        if config is not None:
            lines += [f"config.{k}={v}" for k, v in sorted(vars(config).items())]
        return "\n".join(lines) + "\n"


# -- preparation ----------------------------------------------------------------------


def _lang_dfa(lang):
    return lang.dfa if isinstance(lang, NumerationLanguage) else lang


def _padded_input(dfa, lang_dfa):
    if dfa.m > lang_dfa.m:
        raise fa.AlphabetMismatch(f"input alphabet {dfa.m} exceeds the language alphabet {lang_dfa.m}")
    a = fa.minimize(fa.pad_closure(fa.lift_alphabet(dfa, lang_dfa.m)))
    ok, w = fa.included(a, lang_dfa)
    if not ok:
        raise NotSubsetOfNumerationLanguage(w)
    return a


@dataclass
class _Base:
    """Product of the leading-zero-free language with the padded input."""

    dfa: Dfa  # accepting = in the language
    in_x: np.ndarray  # accepted by the input

    @classmethod
    def build(cls, a_pad, lang_dfa):
        lzf = fa.intersect(lang_dfa, fa.leading_zero_free(lang_dfa.m))
        pa, pb, delta = fa.product_states(lzf, a_pad)
        return cls(Dfa(lang_dfa.m, delta, 0, lzf.final[pa], check=False), a_pad.final[pb])


@dataclass
class PeriodTest:
    period: int
    success: bool
    preperiod: int | None = None
    residues: frozenset | None = None
    clash: int | None = None  # a residue class where both sides are infinite


def _period_test_base(sys, base, pi, cap=None):
    rm = residue_machine(sys, pi, base.dfa.m, cap=cap or WINDOW_CAP)
    qa, qb, delta = fa.product_states(base.dfa, rm.dfa, cap)
    res = rm.residue[qb]
    lf = base.dfa.final[qa]
    xf = lf & base.in_x[qa]
    yf = lf & ~base.in_x[qa]
    peeled, _ = fa.acyclic_part(delta, np.ones(delta.shape[0], dtype=bool))
    x_inf = np.unique(res[xf & ~peeled])
    y_inf = np.unique(res[yf & ~peeled])
    both = np.intersect1d(x_inf, y_inf)
    if both.size:
        return PeriodTest(pi, False, clash=int(both[0]))
    in_r = np.isin(res, x_inf)
    targets = (yf & in_r) | (xf & ~in_r)
    word = _radix_max_word(delta, peeled, targets)
    pre = 0 if word is None else sys.value_of(word) + 1
    return PeriodTest(pi, True, pre, frozenset(int(r) for r in x_inf))


def _radix_max_word(delta, peeled, targets):
    """Largest word in radix order leading from state 0 into ``targets``; every
    such path stays among peeled states, so the set of words is finite."""
    n, m = delta.shape
    NEG = np.int64(-(1 << 40))
    h = np.where(targets & peeled, 0, NEG).astype(np.int64)
    base = h.copy()
    while True:
        succ = h[delta].max(axis=1) + 1
        succ[succ < 0] = NEG
        new = np.maximum(base, succ)
        new[~peeled] = NEG
        if np.array_equal(new, h):
            break
        h = new
    if h[0] < 0:
        return None
    word = []
    s = 0
    while h[s] > 0:
        for d in range(m - 1, -1, -1):
            t = delta[s, d]
            if h[t] == h[s] - 1:
                word.append(d)
                s = t
                break
        else:  # pragma: no cover - h is consistent by construction
            raise AssertionError("inconsistent longest-path table")
    return tuple(word)


def minimal_period(pi, residues):
    """Least period of the pattern ``{n : n mod pi in residues}``."""
    bits = np.zeros(pi, dtype=bool)
    bits[list(residues)] = True
    for d in sorted(sympy.divisors(pi)):
        if np.array_equal(bits, np.roll(bits, -d)):
            return d, frozenset(r % d for r in residues)
    return pi, frozenset(residues)


def period_test(sys, dfa, lang, pi, cap=None):
    """``(preperiod, residues)`` if the set has a period dividing ``pi``, else None."""
    ld = _lang_dfa(lang)
    base = _Base.build(_padded_input(dfa, ld), ld)
    t = _period_test_base(sys, base, pi, cap)
    return (t.preperiod, t.residues) if t.success else None


# -- oracle and fixtures -----------------------------------------------------------------


def oracle_membership(sys, dfa, n_max):
    """Bit ``n`` is 1 iff the greedy representation of ``n`` (leading zeros allowed) is accepted."""
    a = fa.pad_closure(dfa)
    delta = a.delta.tolist()
    final = a.final.tolist()
    out = []
    for n in range(n_max + 1):
        q = a.initial
        for dgt in sys.greedy_rep(n):
            if dgt >= a.m:
                q = None
                break
            q = delta[q][dgt]
        out.append(int(q is not None and final[q]))
    return out


def nerode_lower_bound(sys, lang, spec, prefix_len=3, suffix_len=3):
    """Number of pairwise distinguishable prefixes for ``0^* rep_U(X)``.

    Prefixes are the accepted padded words of length ``prefix_len``, suffixes
    all words of length at most ``suffix_len``.  Two prefixes with different
    rows of the membership table lie in different states of every DFA for the
    language, so the count is a lower bound on the minimal automaton's size.
    Only ``X``'s eventual pattern is used, so it needs ``spec.preperiod == 0``.
    """
    if spec.preperiod:
        raise ValueError("only purely periodic fixtures are supported")
    ld = fa.pad_closure(_lang_dfa(lang))
    m, pi = ld.m, spec.period
    U = sys.terms(prefix_len + suffix_len + 1)
    delta = ld.delta.tolist()
    prefixes = [w for w in ld.words(prefix_len) if len(w) == prefix_len and ld.accepts(w)]
    in_x = np.zeros(pi, dtype=bool)
    in_x[list(spec.residues)] = True
    cols = []
    for ell in range(suffix_len + 1):
        suffixes = [w for w in itertools.product(range(m), repeat=ell)]
        # acceptance of each suffix from each language state
        acc = np.zeros((ld.n, len(suffixes)), dtype=bool)
        for q in range(ld.n):
            for k, w in enumerate(suffixes):
                t = q
                for d in w:
                    t = delta[t][d]
                acc[q, k] = ld.final[t]
        sval = np.array([sum(d * U[ell - 1 - j] for j, d in enumerate(w)) % pi for w in suffixes],
                        dtype=np.int64)
        qs, shifted = [], []
        for x in prefixes:
            q = ld.initial
            for d in x:
                q = delta[q][d]
            qs.append(q)
            shifted.append(sum(d * U[prefix_len - 1 - j + ell] for j, d in enumerate(x)) % pi)
        vals = (np.array(shifted, dtype=np.int64)[:, None] + sval[None, :]) % pi
        cols.append(acc[qs] & in_x[vals])
    table = np.concatenate(cols, axis=1)
    return len({row.tobytes() for row in np.packbits(table, axis=1)})


def _class_union_dfa(sys, lang_dfa, pi, residues):
    rm = residue_machine(sys, pi, lang_dfa.m)
    pa, pb, delta = fa.product_states(lang_dfa, rm.dfa)
    keep = lang_dfa.final[pa] & np.isin(rm.residue[pb], list(residues))
    return Dfa(lang_dfa.m, delta, 0, keep, check=False)


def build_up_set_dfa(sys, spec, lang, cap=DecideConfig.witness_cap):
    """Minimal DFA for ``0^* rep_U(X)`` with ``X`` described by ``spec``."""
    ld = _lang_dfa(lang)
    periodic = _class_union_dfa(sys, ld, spec.period, spec.residues)
    if spec.preperiod > cap:
        raise fa.CapExceeded(f"preperiod {spec.preperiod} exceeds {cap}")
    flips = [sys.greedy_rep(n) for n in range(spec.preperiod)
             if (n in spec.exceptions) != (n % spec.period in spec.residues)]
    if flips:
        fix = fa.pad_closure(fa.words_dfa(ld.m, flips))
        periodic = fa.product(periodic, fa.lift_alphabet(fix, ld.m), "xor")
    return fa.minimize(periodic)


# -- refutation by pumping -------------------------------------------------------------------


def _cyclic_states(delta):
    """States lying on a cycle (iterative Tarjan)."""
    n, m = delta.shape
    succ = delta.tolist()
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    stack = []
    cyclic = [False] * n
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on[root] = True
        while work:
            v, i = work[-1]
            if i < m:
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, 0))
                elif on[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1 or v in succ[v]:
                    for w in comp:
                        cyclic[w] = True
    return cyclic


def _bfs_words(succ, start, targets, limit):
    """Shortest words from ``start`` to up to ``limit`` distinct target states."""
    seen = {start: ()}
    queue = deque([start])
    out = []
    while queue and len(out) < limit:
        q = queue.popleft()
        if targets(q):
            out.append(seen[q])
        for d, r in enumerate(succ[q]):
            if r not in seen:
                seen[r] = seen[q] + (d,)
                queue.append(r)
    return out


def _shortest_cycle(succ, q):
    seen = {}
    queue = deque()
    for d, r in enumerate(succ[q]):
        if r == q:
            return (d,)
        if r not in seen:
            seen[r] = (d,)
            queue.append(r)
    while queue:
        s = queue.popleft()
        for d, r in enumerate(succ[s]):
            if r == q:
                return seen[s] + (d,)
            if r not in seen:
                seen[r] = seen[s] + (d,)
                queue.append(r)
    return None


class _Window:
    """Affine action of digits on ``(val(p 0^j) mod M)_{j < K}``."""

    def __init__(self, sys, M):
        self.rec, N = effective_recurrence(sys)
        self.K = N + len(self.rec)
        self.M = M
        self.U = [u % M for u in sys.terms(self.K)]

    def feed(self, W, word):
        K, M, rec, U = self.K, self.M, self.rec, self.U
        for d in word:
            nv = sum(a * W[K - 1 - t] for t, a in enumerate(rec))
            ext = W[1:] + (nv,)
            W = tuple((ext[j] + d * U[j]) % M for j in range(K))
        return W


def _family_residues(win, x, y, z, orbit_cap):
    """Residues mod M taken infinitely often by ``val(x y^t z)``, or None past the cap."""
    W = win.feed((0,) * win.K, x)
    seen = {}
    orbit = []
    while W not in seen:
        if len(orbit) >= orbit_cap:
            return None
        seen[W] = len(orbit)
        orbit.append(W)
        W = win.feed(W, y)
    return {win.feed(V, z)[0] for V in orbit[seen[W]:]}


def pumping_refutation(sys, base, M, budget=200, orbit_cap=5_000, prefix_len=4):
    """Look for families ``x y^t z`` inside and outside the set sharing a residue
    class mod ``M``; such a class is infinite on both sides, so no period divides ``M``.

    Returns ``(residue, family_in, family_out)`` or None.
    """
    succ = base.dfa.delta.tolist()
    lf = base.dfa.final.tolist()
    inx = base.in_x.tolist()
    cyclic = _cyclic_states(base.dfa.delta)
    useful = fa.useful_mask(base.dfa)
    # prefixes: shortest paths plus every short word, grouped by end state
    prefixes = {}
    order, parent, digit = fa.bfs_order(base.dfa.delta, 0)
    for i, q in enumerate(order.tolist()):
        if cyclic[q] and useful[q]:
            prefixes.setdefault(q, []).append(fa._path(parent, digit, i))
    level = [((), 0)]
    for _ in range(prefix_len):
        nxt = []
        for w, q in level:
            for d in range(base.dfa.m):
                r = succ[q][d]
                if useful[r]:
                    nxt.append((w + (d,), r))
        level = nxt
        for w, q in level:
            if cyclic[q] and w not in prefixes.get(q, ()):
                prefixes.setdefault(q, []).append(w)
    win = _Window(sys, M)
    seen_x, seen_y = {}, {}
    used = 0
    loops = {}
    ends = {}
    for q in sorted(prefixes, key=lambda s: len(prefixes[s][0])):
        if q not in loops:
            ys = [_shortest_cycle(succ, q)]
            if succ[q][0] == q and ys[0] != (0,):
                ys.append((0,))
            loops[q] = ys
            ends[q] = (_bfs_words(succ, q, lambda s: lf[s] and inx[s], 3),
                       _bfs_words(succ, q, lambda s: lf[s] and not inx[s], 3))
        for x in prefixes[q]:
            for y in loops[q]:
                for side, zs in enumerate(ends[q]):
                    mine, other = (seen_x, seen_y) if side == 0 else (seen_y, seen_x)
                    for z in zs:
                        if used >= budget:
                            return None
                        used += 1
                        rs = _family_residues(win, x, y, z, orbit_cap)
                        if rs is None:
                            continue
                        for r in rs:
                            mine.setdefault(r, (x, y, z))
                            if r in other:
                                fam_in, fam_out = ((x, y, z), other[r]) if side == 0 else (other[r], (x, y, z))
                                return r, fam_in, fam_out
    return None


# -- the procedure --------------------------------------------------------------------------


def _guess_periods(bits, admissible, limit):
    n = len(bits)
    arr = np.array(bits, dtype=np.int8)
    out = []
    for pi in range(1, n // 4 + 1):
        if not admissible(pi):
            continue
        diff = np.flatnonzero(arr[:-pi] != arr[pi:])
        a = int(diff[-1]) + 1 if diff.size else 0
        if n - pi - a >= max(2 * pi, n // 4):
            out.append(pi)
            if len(out) >= limit:
                break
    return out


def _gamma_bound(sys, lang_dfa, cap, exact_below=64):
    def fn(Q):
        try:
            if Q < exact_below:
                return max(gamma(sys, q, lang_dfa, cap) for q in sympy.divisors(Q))
            return gamma_upper(sys, Q, lang_dfa, cap)
        except fa.StateBlowup:
            return None
    return fn


def _certificates(sys, certs):
    if certs != "auto":
        return certs
    return [fit_certificate(sys, pc.p) for pc in classify_primes(sys, effective=True)]


def bound_report(sys, a_pad, lang_dfa, Z, certs, config):
    """Period bound report for a padded input automaton."""
    try:
        params = soittola_params(sys)
    except (NoDominantRoot, ArithmeticError) as exc:
        params = None
        log.info("no growth parameters: %s", exc)
    return period_bounds(sys, a_pad.n, lang_dfa, Z=Z, params=params, certs=certs,
                         t2_cap=config.t2_cap, prime_cap=config.prime_cap,
                         gamma_fn=_gamma_bound(sys, lang_dfa, config.state_cap))


def decide(sys, dfa, lang=None, certs=None, config=None):
    """Decide whether the set recognized by ``dfa`` is ultimately periodic.

    ``certs`` is a list of ValuationCertificate, ``"auto"`` to fit them from
    the valuation data, or None.
    """
    config = config or DecideConfig()
    if lang is None:
        lang = default_language(sys)
    ld = _lang_dfa(lang)
    a_pad = _padded_input(dfa, ld)
    base = _Base.build(a_pad, ld)
    flags = []
    if isinstance(lang, NumerationLanguage) and lang.heuristic:
        flags.append("heuristic-language")
    hyp = check_hypotheses(sys).with_C(ld.n)
    if not hyp.G_from_input:
        flags.append("horizon-verified-H3")
    if not hyp.h3_verified:
        flags.append("H3-unverified")

    certs = _certificates(sys, certs)
    report = bound_report(sys, a_pad, ld, hyp.Z, certs, config)
    verdict = Verdict(INCONCLUSIVE, report=report, flags=flags)
    verdict.notes.extend(report.notes)
    Pi = report.max_period if report.reason is None else None

    def succeed(t):
        d, rs = minimal_period(t.period, t.residues)
        ex = None
        if t.preperiod <= config.witness_cap:
            bits = oracle_membership(sys, a_pad, max(t.preperiod - 1, 0)) if t.preperiod else []
            ex = frozenset(n for n in range(t.preperiod) if bits[n])
        else:
            verdict.notes.append("preperiod too large to list exceptions")
            ex = frozenset()
        verdict.outcome = UP
        verdict.witness = UpSetSpec(t.preperiod, d, rs, ex)
        if config.self_check and t.preperiod <= config.witness_cap:
            ok, w = fa.equivalent(build_up_set_dfa(sys, verdict.witness, ld), fa.intersect(a_pad, ld))
            if not ok:  # pragma: no cover - would be a bug
                raise AssertionError(f"witness disagrees with the input on {w}")
        return verdict

    def run(pi):
        try:
            t = _period_test_base(sys, base, pi, config.state_cap)
        except fa.StateBlowup as exc:
            verdict.notes.append(f"period {pi}: {exc}")
            return None
        verdict.tested.append(pi)
        return t

    # guesses from a prefix of the characteristic sequence, checked exactly
    bits = oracle_membership(sys, a_pad, config.oracle_n - 1)
    admissible = (lambda pi: True) if Pi is None else (lambda pi: Pi % pi == 0)
    for pi in _guess_periods(bits, admissible, config.max_guesses):
        t = run(pi)
        if t is not None and t.success:
            return succeed(t)

    if Pi is None:
        verdict.notes.append(report.reason)
        return verdict
    if Pi <= config.period_cap:
        t = run(Pi)
        if t is not None:
            if t.success:
                return succeed(t)
            if report.complete:
                verdict.outcome = NOT_UP
                verdict.notes.append(f"residue class {t.clash} mod {Pi} is infinite on both sides")
                if report.conditional:
                    verdict.flags.append("conditional-certificates")
            else:
                verdict.notes.append(f"no period divides {Pi}; T2 exponents were capped")
            return verdict
    if not report.complete:
        verdict.notes.append("candidate set incomplete (T2 exponents capped)")
        return verdict
    hit = pumping_refutation(sys, base, Pi, config.family_budget, config.orbit_cap)
    if hit is None:
        verdict.notes.append("no refuting pair of pumping families found")
        return verdict
    r, fin, fout = hit
    verdict.outcome = NOT_UP
    if report.conditional:
        verdict.flags.append("conditional-certificates")
    show = lambda f: "/".join("".join(map(str, p)) for p in f)
    verdict.notes.append(f"families {show(fin)} (in) and {show(fout)} (out) share a residue class mod {Pi}")
    return verdict
