import itertools
import random

import pytest

from linnum import automata as fa
from linnum.automata import Dfa, FormatError, Nfa, Transducer


def all_words(m, n):
    for ell in range(n + 1):
        yield from itertools.product(range(m), repeat=ell)


def random_dfa(rng, n, m):
    trans = [[rng.randrange(n) for _ in range(m)] for _ in range(n)]
    acc = [q for q in range(n) if rng.random() < 0.4]
    return Dfa(m, trans, 0, acc)


def lang(d, n):
    return {w for w in all_words(d.m, n) if d.accepts(w)}


def test_minimize_empty():
    d = Dfa(2, [[1, 1], [1, 1]], 0, [])
    assert fa.minimize(d).n == 1


def test_minimize_canonical_on_isomorphic_copies():
    a = Dfa(2, [[1, 2], [0, 2], [2, 2]], 0, [1])
    # same machine with states 1 and 2 swapped
    b = Dfa(2, [[2, 1], [1, 1], [0, 1]], 0, [2])
    assert fa.minimize(a).dumps() == fa.minimize(b).dumps()


def test_minimize_drops_unreachable():
    d = Dfa(2, [[0, 0], [1, 1]], 0, [1])
    assert fa.minimize(d).n == 1
    assert fa.minimize(d).is_empty()


def test_products_trivial():
    rng = random.Random(5)
    a = random_dfa(rng, 5, 2)
    assert fa.equivalent(fa.intersect(a, a), a)[0]
    assert fa.difference(a, a).is_empty()
    assert fa.equivalent(fa.intersect(a, fa.universal_dfa(2)), a)[0]
    with pytest.raises(fa.AlphabetMismatch):
        fa.intersect(a, fa.universal_dfa(3))


def test_finiteness_examples():
    d = fa.words_dfa(2, [(), (1, 0)])
    r = fa.is_finite(d)
    assert r.finite and r.words == [(), (1, 0)]
    star = Dfa(2, [[0, 1], [2, 2], [2, 2]], 0, [1])  # 0*1
    r = fa.is_finite(star)
    assert not r.finite
    x, y, z = r.witness
    for t in range(4):
        assert star.accepts(x + y * t + z)
    r = fa.is_finite(fa.empty_dfa(2))
    assert r.finite and r.words == []


def test_is_finite_cap():
    with pytest.raises(fa.CapExceeded):
        fa.is_finite(fa.words_dfa(2, list(itertools.product(range(2), repeat=6))), cap=10)


def test_equivalent_counterexamples():
    a = Dfa(2, [[1, 1], [1, 1]], 0, [1])  # words of length >= 1
    assert fa.equivalent(a, a) == (True, None)
    b = fa.union(a, fa.words_dfa(2, [()]))
    assert fa.equivalent(a, b) == (False, ())
    assert fa.equivalent(fa.empty_dfa(2), fa.universal_dfa(2)) == (False, ())
    c = fa.union(a, fa.words_dfa(2, [(0, 1, 1)]))
    assert fa.equivalent(fa.universal_dfa(2), fa.difference(fa.universal_dfa(2), fa.words_dfa(2, [(1, 0)])))[1] == (1, 0)
    assert fa.equivalent(a, c)[0]


def test_reverse_examples():
    d = fa.words_dfa(2, [(1, 0)])
    r = fa.reverse_determinize(Nfa.from_dfa(d))
    assert r.accepts((0, 1)) and not r.accepts((1, 0))
    assert fa.equivalent(fa.reverse_determinize(fa.reverse(d)), fa.minimize(d))[0]
    assert fa.reverse_determinize(Nfa.from_dfa(fa.empty_dfa(2))).is_empty()


def test_subset_cap():
    # (0|1)* 1 (0|1)^k needs 2^(k+1) subsets
    k = 8
    n = k + 2
    nfa = Nfa(2, n, [0], [n - 1])
    nfa.add(0, 0, 0)
    nfa.add(0, 1, 0)
    nfa.add(0, 1, 1)
    for q in range(1, n - 1):
        nfa.add(q, 0, q + 1)
        nfa.add(q, 1, q + 1)
    with pytest.raises(fa.StateBlowup):
        fa.determinize(nfa, cap=100)
    assert fa.minimize(fa.determinize(nfa)).n == 2 ** (k + 1)


def test_pad_closure():
    d = fa.words_dfa(3, [(1, 2), (0, 0, 2)])
    p = fa.pad_closure(d)
    for w in [(1, 2), (0, 1, 2), (2,), (0, 0, 0, 2), ()]:
        assert p.accepts(w) == (w in {(1, 2), (0, 1, 2), (2,), (0, 0, 0, 2)})


def test_dfa_text_format():
    text = "alphabet 2\nstates 3\ninitial 0\naccepting 1\ntrans 0 1 1\ntrans 1 0 1\nsink 2\n"
    d = Dfa.loads(text)
    assert d.accepts((1, 0, 0)) and not d.accepts((0,))
    assert Dfa.loads(d.dumps()) == d
    with pytest.raises(FormatError):
        Dfa.loads("alphabet 2\nstates 1\ninitial 0\ntrans 0 0 0\n")
    with pytest.raises(FormatError):
        Dfa.loads("alphabet 2\nstates 1\ninitial 0\nfoo\n")
    with pytest.raises(FormatError):
        Dfa.loads("alphabet 2\nstates 1\ninitial 0\ntrans 0 0 0\ntrans 0 0 1\nsink 0\n")


def test_transducer_identity_and_format():
    rng = random.Random(2)
    d = random_dfa(rng, 4, 3)
    ident = fa.identity_transducer(3)
    assert fa.equivalent(fa.minimize(fa.determinize(fa.image(ident, d))), fa.minimize(d))[0]
    t = Transducer(2, 3, 2, 0, [[(0, (0,)), (1, (2, 2))], [(1, ()), None]], [(1,), None])
    assert t.apply((0, 0)) == (0, 0, 1)
    assert t.apply((1,)) is None
    assert t.apply((1, 1)) is None
    u = Transducer.loads(t.dumps())
    assert u.apply((0, 0)) == t.apply((0, 0))
    c = fa.compose(fa.identity_transducer(2), t)
    for w in all_words(2, 5):
        assert c.apply(w) == t.apply(w)


def test_compose_matches_sequential_application():
    # t1 doubles each symbol, t2 maps symbol s to s+1 mod 3 with a final marker
    t1 = Transducer(3, 3, 1, 0, [[(0, (s, s)) for s in range(3)]], [()])
    t2 = Transducer(3, 3, 1, 0, [[(0, ((s + 1) % 3,)) for s in range(3)]], [(0,)])
    c = fa.compose(t1, t2)
    for w in all_words(3, 4):
        assert c.apply(w) == t2.apply(t1.apply(w))


# -- properties ------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(25))
def test_minimize_preserves_language(seed):
    rng = random.Random(seed)
    d = random_dfa(rng, rng.randint(1, 8), rng.randint(1, 4))
    m = fa.minimize(d)
    depth = 12 if d.m <= 2 else 6
    assert lang(m, depth) == lang(d, depth)
    assert fa.minimize(m).dumps() == m.dumps()
    assert m.n <= d.n


@pytest.mark.parametrize("seed", range(20))
def test_products_against_sets(seed):
    rng = random.Random(100 + seed)
    m = rng.randint(1, 3)
    a, b = random_dfa(rng, rng.randint(1, 5), m), random_dfa(rng, rng.randint(1, 5), m)
    depth = 10 if m <= 2 else 6
    la, lb = lang(a, depth), lang(b, depth)
    assert lang(fa.intersect(a, b), depth) == la & lb
    assert lang(fa.difference(a, b), depth) == la - lb
    assert lang(fa.union(a, b), depth) == la | lb


@pytest.mark.parametrize("seed", range(30))
def test_is_finite_against_pumping_bound(seed):
    rng = random.Random(200 + seed)
    d = random_dfa(rng, rng.randint(1, 4), 2)
    if rng.random() < 0.5:
        # cut down to words of length < 4 so that finite cases show up
        d = fa.minimize(fa.intersect(d, Dfa(2, [[1, 1], [2, 2], [3, 3], [4, 4], [4, 4]], 0, [0, 1, 2, 3])))
    n = d.n
    long_words = any(d.accepts(w) for ell in range(n, 2 * n)
                     for w in itertools.product(range(2), repeat=ell))
    r = fa.is_finite(d)
    assert r.finite == (not long_words)
    if r.finite:
        assert set(r.words) == lang(d, n)


@pytest.mark.parametrize("seed", range(15))
def test_reverse_determinize_property(seed):
    rng = random.Random(300 + seed)
    d = random_dfa(rng, rng.randint(1, 6), 2)
    r = fa.reverse_determinize(Nfa.from_dfa(d))
    for w in all_words(2, 10):
        assert r.accepts(w) == d.accepts(w[::-1])
