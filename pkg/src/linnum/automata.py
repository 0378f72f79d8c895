"""Finite automata over digit alphabets ``0..m-1`` and subsequential transducers.

A Dfa is total and stores its transition table as an ``(n, m)`` numpy array so
that machines with a few million states stay workable; the bulk operations
(reachability, products, Moore refinement) are vectorized layer by layer.
Nfa and Transducer are small plain-Python structures.  Words are tuples of ints.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

DEFAULT_SUBSET_CAP = 1 << 20
DEFAULT_WORD_CAP = 100_000


class AlphabetMismatch(ValueError):
    pass


class StateBlowup(RuntimeError):
    pass


class CapExceeded(RuntimeError):
    pass


class FormatError(ValueError):
    pass


def _as_table(trans, m):
    arr = np.asarray(trans, dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, m)
    if arr.ndim != 2 or arr.shape[1] != m:
        raise ValueError("transition table has the wrong shape")
    return arr


class Dfa:
    """Complete DFA.  ``delta[q, d]`` is the successor of ``q`` on digit ``d``."""

    __slots__ = ("m", "delta", "initial", "final", "_hash")

    def __init__(self, m, trans, initial, accepting, check=True):
        self.m = int(m)
        self.delta = _as_table(trans, self.m)
        self.delta.setflags(write=False)
        n = self.delta.shape[0]
        self.initial = int(initial)
        acc = np.asarray(accepting)
        if acc.dtype == bool and acc.shape == (n,):
            final = acc.copy()
        else:
            final = np.zeros(n, dtype=bool)
            idx = np.asarray(list(accepting) if not isinstance(accepting, np.ndarray) else accepting,
                             dtype=np.int64)
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise ValueError("accepting state out of range")
            final[idx] = True
        final.setflags(write=False)
        self.final = final
        self._hash = None
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        if check and self.delta.size and (self.delta.min() < 0 or self.delta.max() >= n):
            raise ValueError("transition table is not total")

    @property
    def n(self):
        return self.delta.shape[0]

    @property
    def accepting(self):
        return frozenset(np.flatnonzero(self.final).tolist())

    @property
    def trans(self):
        return self.delta.tolist()

    def __repr__(self):
        return f"<Dfa m={self.m} states={self.n} accepting={int(self.final.sum())}>"

    def __eq__(self, other):
        return (isinstance(other, Dfa) and self.m == other.m and self.initial == other.initial
                and self.delta.shape == other.delta.shape
                and np.array_equal(self.delta, other.delta)
                and np.array_equal(self.final, other.final))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.m, self.initial, self.delta.tobytes(), self.final.tobytes()))
        return self._hash

    def run(self, word, state=None):
        q = self.initial if state is None else state
        delta = self.delta
        for d in word:
            if not 0 <= d < self.m:
                return None
            q = int(delta[q, d])
        return q

    def accepts(self, word):
        q = self.run(word)
        return q is not None and bool(self.final[q])

    def words(self, max_len):
        """All accepted words of length <= max_len, shortest first then lexicographic."""
        out = []
        layer = [((), self.initial)]
        delta = self.delta.tolist()
        for length in range(max_len + 1):
            out.extend(w for w, q in layer if self.final[q])
            if length == max_len:
                break
            layer = [(w + (d,), delta[q][d]) for w, q in layer for d in range(self.m)]
        return out

    def reachable(self):
        return bfs_order(self.delta, self.initial)[0].tolist()

    def is_empty(self):
        order, _, _ = bfs_order(self.delta, self.initial)
        return not self.final[order].any()

    # -- text format --------------------------------------------------------

    def dumps(self):
        lines = [f"alphabet {self.m}", f"states {self.n}", f"initial {self.initial}",
                 "accepting" + "".join(f" {q}" for q in np.flatnonzero(self.final).tolist())]
        for q, row in enumerate(self.delta.tolist()):
            for d, r in enumerate(row):
                lines.append(f"trans {q} {d} {r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        m = n = q0 = sink = None
        acc = []
        edges = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            parts = raw.split("#", 1)[0].split()
            if not parts:
                continue
            key, args = parts[0], parts[1:]
            try:
                vals = [int(a) for a in args]
            except ValueError:
                raise FormatError(f"line {lineno}: non-integer field") from None
            if key == "alphabet" and len(vals) == 1:
                m = vals[0]
            elif key == "states" and len(vals) == 1:
                n = vals[0]
            elif key == "initial" and len(vals) == 1:
                q0 = vals[0]
            elif key == "accepting":
                acc.extend(vals)
            elif key == "sink" and len(vals) == 1:
                sink = vals[0]
            elif key == "trans" and len(vals) == 3:
                q, d, r = vals
                if (q, d) in edges and edges[q, d] != r:
                    raise FormatError(f"line {lineno}: nondeterministic transition")
                edges[q, d] = r
            else:
                raise FormatError(f"line {lineno}: cannot parse {raw!r}")
        if m is None or n is None or q0 is None:
            raise FormatError("missing alphabet, states or initial line")
        trans = []
        for q in range(n):
            row = []
            for d in range(m):
                r = edges.get((q, d), sink)
                if r is None:
                    raise FormatError(f"missing transition from {q} on {d} and no sink declared")
                row.append(r)
            trans.append(row)
        try:
            return cls(m, trans, q0, acc)
        except ValueError as exc:
            raise FormatError(str(exc)) from None


# -- graph helpers ------------------------------------------------------------


def bfs_order(delta, start):
    """Canonical BFS order from ``start`` (queue order, smallest digit first).

    Returns ``(order, parent, digit)`` where ``parent[i]``/``digit[i]`` give the
    discovery edge of ``order[i]`` as an index into ``order`` (-1 for the root).
    """
    n, m = delta.shape
    seen = np.zeros(n, dtype=bool)
    seen[start] = True
    orders = [np.array([start], dtype=np.int64)]
    parents = [np.array([-1], dtype=np.int64)]
    digits = [np.array([-1], dtype=np.int64)]
    frontier = orders[0]
    base = 0
    while frontier.size:
        children = delta[frontier].ravel()
        fresh = ~seen[children]
        if not fresh.any():
            break
        pos = np.flatnonzero(fresh)
        cand = children[pos]
        _, first = np.unique(cand, return_index=True)
        first.sort()
        new = cand[first]
        seen[new] = True
        src = pos[first]
        orders.append(new)
        parents.append(base + src // m)
        digits.append(src % m)
        base += frontier.size
        frontier = new
    return np.concatenate(orders), np.concatenate(parents), np.concatenate(digits)


def _reverse_csr(delta, mask=None):
    """Predecessor lists as CSR arrays (indptr, sources); edges into/out of
    states outside ``mask`` are dropped."""
    n, m = delta.shape
    src = np.repeat(np.arange(n, dtype=np.int64), m)
    dst = delta.ravel()
    if mask is not None:
        keep = mask[src] & mask[dst]
        src, dst = src[keep], dst[keep]
    order = np.argsort(dst, kind="stable")
    counts = np.bincount(dst, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, src[order]


def coreachable_mask(delta, targets):
    """States from which some state in the boolean mask ``targets`` is reachable."""
    n = delta.shape[0]
    indptr, preds = _reverse_csr(delta)
    seen = targets.copy()
    frontier = np.flatnonzero(seen)
    while frontier.size:
        starts, ends = indptr[frontier], indptr[frontier + 1]
        lens = ends - starts
        if not lens.sum():
            break
        idx = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
        cand = np.unique(preds[idx])
        cand = cand[~seen[cand]]
        seen[cand] = True
        frontier = cand
    return seen


def reachable_mask(delta, start):
    n = delta.shape[0]
    seen = np.zeros(n, dtype=bool)
    order, _, _ = bfs_order(delta, start)
    seen[order] = True
    return seen


def acyclic_part(delta, mask):
    """Within the subgraph induced by ``mask``, the states with no cycle among
    their ancestors (Kahn peeling).  Also returns a topological order of them."""
    n, m = delta.shape
    src = np.repeat(np.arange(n, dtype=np.int64), m)
    dst = delta.ravel()
    keep = mask[src] & mask[dst]
    src, dst = src[keep], dst[keep]
    indeg = np.bincount(dst, minlength=n)
    # out-adjacency in CSR form for the kept edges
    order = np.argsort(src, kind="stable")
    out_dst = dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    peeled = np.zeros(n, dtype=bool)
    frontier = np.flatnonzero(mask & (indeg == 0))
    topo = []
    while frontier.size:
        peeled[frontier] = True
        topo.append(frontier)
        starts, ends = indptr[frontier], indptr[frontier + 1]
        lens = ends - starts
        total = int(lens.sum())
        if not total:
            break
        idx = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
        targets = out_dst[idx]
        np.subtract.at(indeg, targets, 1)
        cand = np.unique(targets)
        frontier = cand[(indeg[cand] == 0) & ~peeled[cand]]
    topo = np.concatenate(topo) if topo else np.zeros(0, dtype=np.int64)
    return peeled, topo


# -- constructors -------------------------------------------------------------


def empty_dfa(m):
    return Dfa(m, [[0] * m], 0, [])


def universal_dfa(m):
    return Dfa(m, [[0] * m], 0, [0])


def words_dfa(m, words):
    """Trie automaton accepting exactly the given finite set."""
    trans = [[-1] * m]
    acc = set()
    for w in words:
        q = 0
        for d in w:
            if not 0 <= d < m:
                raise AlphabetMismatch(f"digit {d} outside alphabet {m}")
            if trans[q][d] < 0:
                trans.append([-1] * m)
                trans[q][d] = len(trans) - 1
            q = trans[q][d]
        acc.add(q)
    sink = len(trans)
    trans.append([sink] * m)
    trans = [[sink if r < 0 else r for r in row] for row in trans]
    return Dfa(m, trans, 0, sorted(acc))


def leading_zero_free(m):
    """Words that are empty or start with a non-zero digit."""
    if m < 2:
        return Dfa(m, [[1], [1]], 0, [0])
    return Dfa(m, [[2] + [1] * (m - 1), [1] * m, [2] * m], 0, [0, 1])


def factor_avoiding_dfa(m, factors):
    """Words over ``0..m-1`` containing none of the given factors (Aho-Corasick)."""
    goto = [{}]
    fail = [0]
    bad = [False]
    for f in factors:
        q = 0
        for d in f:
            if d not in goto[q]:
                goto.append({})
                fail.append(0)
                bad.append(False)
                goto[q][d] = len(goto) - 1
            q = goto[q][d]
        bad[q] = True
    trans = [[0] * m for _ in goto]
    queue = deque()
    for d in range(m):
        r = goto[0].get(d)
        if r is not None:
            trans[0][d] = r
            queue.append(r)
    while queue:
        q = queue.popleft()
        bad[q] = bad[q] or bad[fail[q]]
        for d in range(m):
            r = goto[q].get(d)
            if r is None:
                trans[q][d] = trans[fail[q]][d]
            else:
                fail[r] = trans[fail[q]][d]
                trans[q][d] = r
                queue.append(r)
    # once a factor is seen the word is dead
    dead = len(goto)
    trans = [[dead if bad[q] else r for r in row] for q, row in enumerate(trans)] + [[dead] * m]
    return minimize(Dfa(m, trans, 0, [q for q in range(len(goto)) if not bad[q]]))


# -- minimization -------------------------------------------------------------


def canonical(d):
    """Renumber reachable states in BFS order, smallest digit first."""
    order, _, _ = bfs_order(d.delta, d.initial)
    index = np.full(d.n, -1, dtype=np.int64)
    index[order] = np.arange(order.size)
    return Dfa(d.m, index[d.delta[order]], 0, d.final[order], check=False)


def trim_reachable(d):
    return canonical(d)


def _refine(delta, final):
    """Coarsest stable partition (Moore refinement), as class ids."""
    n, m = delta.shape
    _, cls = np.unique(final.astype(np.int64), return_inverse=True)
    count = int(cls.max()) + 1 if n else 0
    while True:
        key = cls.astype(np.int64)
        span = count  # key < span
        for d in range(m):
            if span * count >= 1 << 62:
                _, key = np.unique(key, return_inverse=True)
                span = int(key.max()) + 1
            key = key * count + cls[delta[:, d]]
            span *= count
        _, key = np.unique(key, return_inverse=True)
        new_count = int(key.max()) + 1
        if new_count == count:
            return key
        cls, count = key, new_count


def minimize(d):
    """Minimal complete DFA in canonical form."""
    d = canonical(d)
    cls = _refine(d.delta, d.final)
    k = int(cls.max()) + 1
    rep = np.zeros(k, dtype=np.int64)
    rep[cls[::-1]] = np.arange(d.n - 1, -1, -1)  # first member of each class
    delta = cls[d.delta[rep]]
    return canonical(Dfa(d.m, delta, int(cls[d.initial]), d.final[rep], check=False))


# -- boolean operations ---------------------------------------------------------

_MODES = {
    "and": lambda x, y: x & y,
    "or": lambda x, y: x | y,
    "diff": lambda x, y: x & ~y,
    "xor": lambda x, y: x ^ y,
}


_DENSE_INDEX = 1 << 24  # pair grids up to this size get a direct lookup table


def product_states(a, b, cap=None):
    """Reachable pairs of the synchronous product as ``(pa, pb, delta)``."""
    if a.m != b.m:
        raise AlphabetMismatch(f"alphabets {a.m} and {b.m} differ")
    m = a.m
    nb = np.int64(b.n)
    start = np.array([a.initial * nb + b.initial], dtype=np.int64)
    layers = [start]
    known = start.copy()
    frontier = start
    total = 1
    seen = None
    if a.n * b.n <= _DENSE_INDEX:
        seen = np.zeros(a.n * b.n, dtype=bool)
        seen[start] = True
    while frontier.size:
        pa, pb = frontier // nb, frontier % nb
        children = (a.delta[pa] * nb + b.delta[pb]).ravel()
        if seen is not None:
            new = np.unique(children[~seen[children]])
            seen[new] = True
        else:
            children = np.unique(children)
            new = children[~np.isin(children, known, assume_unique=True)]
        if not new.size:
            break
        total += new.size
        if cap is not None and total > cap:
            raise StateBlowup(f"product exceeded {cap} states")
        if seen is None:
            known = np.union1d(known, new)
        layers.append(new)
        frontier = new
    codes = np.concatenate(layers)
    pa, pb = codes // nb, codes % nb
    child = (a.delta[pa] * nb + b.delta[pb])
    if a.n * b.n <= _DENSE_INDEX:
        index = np.empty(a.n * b.n, dtype=np.int64)
        index[codes] = np.arange(codes.size)
        return pa, pb, index[child]
    perm = np.argsort(codes)
    delta = perm[np.searchsorted(codes[perm], child)]
    return pa, pb, delta


def product(a, b, mode="and", cap=None):
    pa, pb, delta = product_states(a, b, cap)
    final = _MODES[mode](a.final[pa], b.final[pb])
    return Dfa(a.m, delta, 0, final, check=False)


def intersect(a, b):
    return product(a, b, "and")


def union(a, b):
    return product(a, b, "or")


def difference(a, b):
    return product(a, b, "diff")


def complement_within(a, ambient):
    return product(ambient, a, "diff")


def complement(a):
    """Absolute complement over all words, including non-greedy ones.

    Prefer complement_within inside a numeration language.
    """
    return Dfa(a.m, a.delta, a.initial, ~a.final, check=False)


def lift_alphabet(d, m):
    """Same language over a larger alphabet ``0..m-1``."""
    if m < d.m:
        raise AlphabetMismatch("cannot shrink an alphabet")
    if m == d.m:
        return d
    sink = d.n
    delta = np.full((d.n + 1, m), sink, dtype=np.int64)
    delta[: d.n, : d.m] = d.delta
    return Dfa(m, delta, d.initial, np.append(d.final, False), check=False)


# -- decision procedures ------------------------------------------------------


def _path(parent, digit, i):
    word = []
    while parent[i] >= 0:
        word.append(int(digit[i]))
        i = parent[i]
    return tuple(reversed(word))


def shortest_accepted(d):
    """A shortest accepted word (lexicographically least among those), or None."""
    order, parent, digit = bfs_order(d.delta, d.initial)
    hits = np.flatnonzero(d.final[order])
    if not hits.size:
        return None
    return _path(parent, digit, int(hits[0]))


def equivalent(a, b):
    """``(True, None)`` or ``(False, w)`` with ``w`` a shortest separating word."""
    w = shortest_accepted(product(a, b, "xor"))
    return (True, None) if w is None else (False, w)


def included(a, b):
    """``(True, None)`` or ``(False, w)`` with ``w`` in L(a) but not in L(b)."""
    w = shortest_accepted(product(a, b, "diff"))
    return (True, None) if w is None else (False, w)


@dataclass
class Finiteness:
    finite: bool
    words: list | None = None  # all accepted words when finite
    witness: tuple | None = None  # (prefix, loop, suffix) when infinite


def useful_mask(d):
    return reachable_mask(d.delta, d.initial) & coreachable_mask(d.delta, d.final)


def is_finite(d, cap=DEFAULT_WORD_CAP, enumerate_words=True):
    useful = useful_mask(d)
    peeled, topo = acyclic_part(d.delta, useful)
    cyclic = useful & ~peeled
    if cyclic.any():
        return Finiteness(False, witness=_pump_witness(d, useful, cyclic))
    if not enumerate_words:
        return Finiteness(True)
    words = []
    delta = d.delta.tolist()
    stack = [(d.initial, ())] if useful[d.initial] else []
    while stack:
        q, w = stack.pop()
        if d.final[q]:
            words.append(w)
            if len(words) > cap:
                raise CapExceeded(f"more than {cap} accepted words")
        for s in range(d.m - 1, -1, -1):
            r = delta[q][s]
            if useful[r]:
                stack.append((r, w + (s,)))
    words.sort(key=lambda w: (len(w), w))
    return Finiteness(True, words=words)


def _pump_witness(d, useful, cyclic):
    """``(x, y, z)`` with ``x y^t z`` accepted for every ``t``."""
    delta = d.delta.tolist()
    # walk forward inside the cyclic part until a state repeats
    q = int(np.flatnonzero(cyclic)[0])
    # a state surviving Kahn peeling either lies on a cycle or below one; walk
    # back along surviving predecessors to land on a cycle
    indptr, preds = _reverse_csr(d.delta, cyclic)
    seen = {}
    path = []
    while q not in seen:
        seen[q] = len(path)
        path.append(q)
        q = int(preds[indptr[q]])
    cycle = path[seen[q]:][::-1]  # forward order along edges
    loop = []
    for i, s in enumerate(cycle):
        t = cycle[(i + 1) % len(cycle)]
        loop.append(delta[s].index(t))
    start = cycle[0]
    order, parent, digit = bfs_order(d.delta, d.initial)
    pos = int(np.flatnonzero(order == start)[0])
    prefix = _path(parent, digit, pos)
    rev_order, rev_parent, rev_digit = bfs_order(d.delta, start)
    hit = int(np.flatnonzero(d.final[rev_order])[0])
    suffix = _path(rev_parent, rev_digit, hit)
    return prefix, tuple(loop), suffix


# -- nondeterminism -----------------------------------------------------------


class Nfa:
    """Nondeterministic automaton with epsilon moves (symbol ``None``)."""

    def __init__(self, m, n, initials, accepting, edges=()):
        self.m = int(m)
        self.n = int(n)
        self.initials = frozenset(initials)
        self.accepting = frozenset(accepting)
        self.delta = [dict() for _ in range(self.n)]
        for q, s, r in edges:
            self.add(q, s, r)

    def add_state(self):
        self.delta.append({})
        self.n += 1
        return self.n - 1

    def add(self, q, s, r):
        if s is not None and not 0 <= s < self.m:
            raise AlphabetMismatch(f"symbol {s} outside alphabet {self.m}")
        self.delta[q].setdefault(s, set()).add(r)

    def edges(self):
        for q, row in enumerate(self.delta):
            for s, targets in row.items():
                for r in targets:
                    yield q, s, r

    def closure(self, states):
        out = set(states)
        stack = list(states)
        while stack:
            q = stack.pop()
            for r in self.delta[q].get(None, ()):
                if r not in out:
                    out.add(r)
                    stack.append(r)
        return frozenset(out)

    def accepts(self, word):
        cur = self.closure(self.initials)
        for s in word:
            nxt = set()
            for q in cur:
                nxt.update(self.delta[q].get(s, ()))
            cur = self.closure(nxt)
        return bool(cur & self.accepting)

    @classmethod
    def from_dfa(cls, d):
        nfa = cls(d.m, d.n, [d.initial], d.accepting)
        for q, row in enumerate(d.delta.tolist()):
            for s, r in enumerate(row):
                nfa.add(q, s, r)
        return nfa


def determinize(nfa, cap=DEFAULT_SUBSET_CAP):
    start = nfa.closure(nfa.initials)
    index = {start: 0}
    order = [start]
    trans = []
    for subset in order:
        row = []
        for s in range(nfa.m):
            nxt = set()
            for q in subset:
                nxt.update(nfa.delta[q].get(s, ()))
            key = nfa.closure(nxt)
            j = index.get(key)
            if j is None:
                if len(order) >= cap:
                    raise StateBlowup(f"subset construction exceeded {cap} states")
                j = index[key] = len(order)
                order.append(key)
            row.append(j)
        trans.append(row)
    acc = [i for i, sub in enumerate(order) if sub & nfa.accepting]
    return Dfa(nfa.m, trans, 0, acc)


def reverse(nfa):
    if isinstance(nfa, Dfa):
        nfa = Nfa.from_dfa(nfa)
    out = Nfa(nfa.m, nfa.n, nfa.accepting, nfa.initials)
    for q, s, r in nfa.edges():
        out.add(r, s, q)
    return out


def reverse_determinize(nfa, cap=DEFAULT_SUBSET_CAP):
    return minimize(determinize(reverse(nfa), cap))


def pad_closure(d):
    """Language ``0^* strip(L)``: every word of L with its leading zeros removed,
    then any number of zeros put back."""
    # states visited from the initial state by reading zeros
    orbit = []
    q = d.initial
    while q not in orbit:
        orbit.append(q)
        q = int(d.delta[q, 0])
    if len(orbit) == 1:
        return d
    delta = d.delta.tolist()
    start = ("z",)
    index = {start: 0}
    keys = [start]
    trans = []
    final = []
    for key in keys:
        if key == start:
            succ = [start] + [tuple(sorted({delta[p][s] for p in orbit})) for s in range(1, d.m)]
            final.append(any(d.final[p] for p in orbit))
        else:
            succ = [tuple(sorted({delta[p][s] for p in key})) for s in range(d.m)]
            final.append(any(d.final[p] for p in key))
        row = []
        for k in succ:
            j = index.get(k)
            if j is None:
                j = index[k] = len(keys)
                keys.append(k)
            row.append(j)
        trans.append(row)
    return minimize(Dfa(d.m, trans, 0, np.array(final, dtype=bool)))


def strip_padding(d):
    """Words of ``L`` that do not start with 0."""
    return minimize(intersect(d, leading_zero_free(d.m)))


# -- transducers ----------------------------------------------------------------


class Transducer:
    """Subsequential transducer: deterministic on input, each edge emits a word,
    and final states emit a last word."""

    def __init__(self, in_m, out_m, n, initial, trans, final):
        self.in_m = int(in_m)
        self.out_m = int(out_m)
        self.n = int(n)
        self.initial = int(initial)
        # trans[q][d] is (r, out) or None
        self.trans = [[None if e is None else (int(e[0]), tuple(e[1])) for e in row] for row in trans]
        self.final = [None if f is None else tuple(f) for f in final]
        if len(self.trans) != self.n or len(self.final) != self.n:
            raise ValueError("state count mismatch")
        for row in self.trans:
            if len(row) != self.in_m:
                raise ValueError("transition row has wrong width")
            for e in row:
                if e is not None and any(not 0 <= o < self.out_m for o in e[1]):
                    raise AlphabetMismatch("output symbol outside output alphabet")

    def __repr__(self):
        return f"<Transducer in={self.in_m} out={self.out_m} states={self.n}>"

    def apply(self, word):
        q = self.initial
        out = []
        for s in word:
            if not 0 <= s < self.in_m:
                return None
            e = self.trans[q][s]
            if e is None:
                return None
            q, o = e
            out.extend(o)
        if self.final[q] is None:
            return None
        out.extend(self.final[q])
        return tuple(out)

    def dumps(self):
        lines = [f"input {self.in_m}", f"output {self.out_m}", f"states {self.n}",
                 f"initial {self.initial}"]
        for q, f in enumerate(self.final):
            if f is not None:
                lines.append("final " + " ".join(map(str, (q,) + tuple(f))))
        for q, row in enumerate(self.trans):
            for s, e in enumerate(row):
                if e is not None:
                    lines.append("trans " + " ".join(map(str, (q, s, e[0]) + tuple(e[1]))))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text):
        head = {}
        finals = {}
        edges = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            parts = raw.split("#", 1)[0].split()
            if not parts:
                continue
            key = parts[0]
            try:
                vals = [int(a) for a in parts[1:]]
            except ValueError:
                raise FormatError(f"line {lineno}: non-integer field") from None
            if key in ("input", "output", "states", "initial") and len(vals) == 1:
                head[key] = vals[0]
            elif key == "final" and vals:
                finals[vals[0]] = tuple(vals[1:])
            elif key == "trans" and len(vals) >= 3:
                edges[vals[0], vals[1]] = (vals[2], tuple(vals[3:]))
            else:
                raise FormatError(f"line {lineno}: cannot parse {raw!r}")
        missing = {"input", "output", "states", "initial"} - set(head)
        if missing:
            raise FormatError(f"missing header lines: {', '.join(sorted(missing))}")
        n = head["states"]
        trans = [[edges.get((q, s)) for s in range(head["input"])] for q in range(n)]
        final = [finals.get(q) for q in range(n)]
        return cls(head["input"], head["output"], n, head["initial"], trans, final)


def identity_transducer(m):
    return Transducer(m, m, 1, 0, [[(0, (s,)) for s in range(m)]], [()])


def compose(t1, t2):
    """Transducer for ``t2(t1(w))``."""
    if t1.out_m > t2.in_m:
        raise AlphabetMismatch("output alphabet of the first transducer exceeds input of the second")

    def feed(q2, word):
        out = []
        for s in word:
            e = t2.trans[q2][s]
            if e is None:
                return None
            q2, o = e
            out.extend(o)
        return q2, tuple(out)

    start = (t1.initial, t2.initial)
    index = {start: 0}
    order = [start]
    trans = []
    final = []
    for q1, q2 in order:
        row = []
        for s in range(t1.in_m):
            e = t1.trans[q1][s]
            res = None if e is None else feed(q2, e[1])
            if res is None:
                row.append(None)
                continue
            key = (e[0], res[0])
            j = index.get(key)
            if j is None:
                j = index[key] = len(order)
                order.append(key)
            row.append((j, res[1]))
        trans.append(row)
        f1 = t1.final[q1]
        f = None
        if f1 is not None:
            res = feed(q2, f1)
            if res is not None and t2.final[res[0]] is not None:
                f = res[1] + t2.final[res[0]]
        final.append(f)
    return Transducer(t1.in_m, t2.out_m, len(order), 0, trans, final)


def image(t, lang):
    """NFA over the output alphabet accepting ``t(L)``."""
    if t.in_m != lang.m:
        raise AlphabetMismatch(f"transducer reads {t.in_m} symbols, language has {lang.m}")
    ldelta = lang.delta.tolist()
    start = (t.initial, lang.initial)
    index = {start: 0}
    order = [start]
    nfa = Nfa(t.out_m, 1, [0], [])
    accept = nfa.add_state()
    node = [0]

    def chain(src, word, dst):
        if not word:
            nfa.add(src, None, dst)
            return
        cur = src
        for k, s in enumerate(word):
            nxt = dst if k == len(word) - 1 else nfa.add_state()
            nfa.add(cur, s, nxt)
            cur = nxt

    i = 0
    while i < len(order):
        qt, ql = order[i]
        src = node[i]
        for s in range(t.in_m):
            e = t.trans[qt][s]
            if e is None:
                continue
            key = (e[0], ldelta[ql][s])
            j = index.get(key)
            if j is None:
                j = index[key] = len(order)
                order.append(key)
                node.append(nfa.add_state())
            chain(src, e[1], node[j])
        if lang.final[ql] and t.final[qt] is not None:
            chain(src, t.final[qt], accept)
        i += 1
    nfa.accepting = frozenset([accept])
    return nfa
