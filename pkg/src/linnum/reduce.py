"""Reduction of merge-form systems to an integer base.

When ``U_{i+u} = b U_i`` for every ``i >= N``, a greedy word read least
significant digit first can be cut into a head of ``N + u`` digits and
blocks of ``u`` digits.  Each piece becomes one base-``b`` digit (possibly
too large), and a carry transducer then normalizes the result.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import automata as fa
from .automata import Dfa, Transducer
from .langs import NumerationLanguage


@dataclass(frozen=True)
class MergeForm:
    b: int
    u: int
    N: int
    exact: bool
    checked_to: int

    @property
    def exactness(self):
        return "exact" if self.exact else "horizon-verified"


def _holds(U, b, u, N, stop):
    return all(U[i + u] == b * U[i] for i in range(N, stop))


def detect_merge_form(sys, horizon=60, max_u=None, max_N=None):
    """Smallest ``(u, N)`` with ``U_{i+u} = b U_i`` for ``N <= i <= horizon``.

    The identity ``R(E) U = 0`` with ``R = x^N (x^u - b)`` is itself a sequence
    obeying the system's recurrence, whose order (with the offset) is
    ``sys.offset + sys.order``.  Checking that many consecutive indices from
    ``N`` therefore proves it for all ``i >= N``; the form is then exact.
    """
    depth = sys.offset + sys.order
    max_u = max_u or 2 * depth
    max_N = sys.offset + 2 * depth if max_N is None else max_N
    stop = max(horizon, max_N + depth) + 1
    U = sys.terms(stop + max_u)
    for u in range(1, max_u + 1):
        for N in range(0, max_N + 1):
            q, r = divmod(U[N + u], U[N])
            if r or q < 2:
                continue
            if _holds(U, q, u, N, stop):
                exact = _holds(U, q, u, N, N + depth)
                return MergeForm(q, u, N, exact, stop - 1)
    return None


def chunking_transducer(sys, form, m=None):
    """LSDF transducer from padded greedy words of length ``N + k u`` (``k >= 1``)
    to non-canonical base-``b`` digits ``d_0 d_1 ...`` (least significant first).

    The head ``c_{N+u-1} .. c_0`` gives ``d_0 = val_U`` of it; each following
    block ``c_{N+(j+1)u-1} .. c_{N+ju}`` gives ``sum_t c_{N+ju+t} U_{N+t}``.
    """
    m = m or sys.alphabet_bound
    N, u = form.N, form.u
    U = sys.terms(N + u)
    out_m = (m - 1) * sum(U[: N + u]) + 1
    # states: ("h", position, partial) in the head, ("b", t, partial) in a block
    index, keys, trans, final = {}, [], [], []

    def state(key):
        j = index.get(key)
        if j is None:
            j = index[key] = len(keys)
            keys.append(key)
        return j

    state(("h", 0, 0))
    i = 0
    while i < len(keys):
        kind, pos, acc = keys[i]
        row = []
        for c in range(m):
            if kind == "h":
                v = acc + c * U[pos]
                if pos + 1 == N + u:
                    row.append((state(("b", 0, 0)), (v,)))
                else:
                    row.append((state(("h", pos + 1, v)), ()))
            else:
                v = acc + c * U[N + pos]
                if pos + 1 == u:
                    row.append((state(("b", 0, 0)), (v,)))
                else:
                    row.append((state(("b", pos + 1, v)), ()))
        trans.append(row)
        final.append(() if (kind, pos, acc) == ("b", 0, 0) else None)
        i += 1
    return Transducer(m, out_m, len(keys), 0, trans, final)


def normalization_transducer(b, max_digit):
    """LSDF carry propagation from digits ``0..max_digit`` to ``0..b-1``."""
    if b < 2 or max_digit < b - 1:
        raise ValueError("need b >= 2 and max_digit >= b - 1")
    # carry c satisfies c <= (max_digit + c) // b, so c < max_digit / (b - 1) + 1
    cmax = -(-max_digit // (b - 1))
    trans, final = [], []
    for c in range(cmax + 1):
        row = []
        for d in range(max_digit + 1):
            q, r = divmod(d + c, b)
            row.append((q, (r,)) if q <= cmax else None)
        trans.append(row)
        tail = []
        while c:
            c, r = divmod(c, b)
            tail.append(r)
        final.append(tuple(tail))
    return Transducer(max_digit + 1, b, cmax + 1, 0, trans, final)


def _length_dfa(m, N, u):
    """Words of length ``N + k u`` with ``k >= 1``."""
    n0 = N + u  # states 0..n0 count the head, then cycle of u
    trans = []
    for q in range(n0 + u):
        nxt = q + 1 if q + 1 < n0 + u else n0
        trans.append([nxt] * m)
    return Dfa(m, trans, 0, [n0])


def reduce_to_base(sys, form, dfa, lang=None, cap=fa.DEFAULT_SUBSET_CAP):
    """Minimal MSDF DFA for ``0^* rep_b(X)`` from a DFA for ``rep_U(X)``."""
    ld = lang.dfa if isinstance(lang, NumerationLanguage) else lang
    m = dfa.m if ld is None else max(dfa.m, ld.m)
    d = fa.lift_alphabet(dfa, m) if dfa.m < m else dfa
    if ld is not None:
        ld = fa.lift_alphabet(ld, m) if ld.m < m else ld
        d = fa.intersect(d, ld)
    L = fa.intersect(fa.pad_closure(d), _length_dfa(m, form.N, form.u))
    lsdf = fa.reverse_determinize(L, cap)
    chunk = chunking_transducer(sys, form, m)
    norm = normalization_transducer(form.b, max(chunk.out_m - 1, form.b - 1))
    t = fa.compose(chunk, norm)
    img = fa.image(t, lsdf)
    return fa.pad_closure(fa.reverse_determinize(img, cap))


def base_residue_dfa(b, Q, residues):
    """Independent MSDF base-``b`` machine for ``{n : n mod Q in residues}``."""
    trans = [[(v * b + d) % Q for d in range(b)] for v in range(Q)]
    return fa.minimize(Dfa(b, trans, 0, sorted(set(r % Q for r in residues))))


def base_rep(n, b):
    out = []
    while n:
        n, r = divmod(n, b)
        out.append(r)
    return tuple(reversed(out))
