import itertools

import pytest

from linnum import automata as fa
from linnum.langs import congruence_dfa, default_language
from linnum.reduce import (MergeForm, base_rep, base_residue_dfa, chunking_transducer,
                           detect_merge_form, normalization_transducer, reduce_to_base)
from linnum.systems import named


@pytest.mark.parametrize("name,form", [("merge", (6, 2, 0, True)), ("noth2ok", (4, 3, 0, True)),
                                       ("toy", None), ("fib", None)])
def test_detect_merge_form(name, form):
    got = detect_merge_form(named(name))
    if form is None:
        assert got is None
    else:
        assert (got.b, got.u, got.N, got.exact) == form
        assert got.exactness == "exact"
        U = named(name).terms(80)
        assert all(U[i + got.u] == got.b * U[i] for i in range(got.N, 70))


def test_chunking_transducer_values():
    s = named("merge")
    form = detect_merge_form(s)
    t = chunking_transducer(s, form)
    assert t.out_m == 7
    assert t.apply((1, 0, 1)) is None  # odd length is not N + k u
    U = s.terms(12)
    for n in range(1, 300):
        w = s.greedy_rep(n)
        if len(w) % 2:
            w = (0,) + w
        digits = t.apply(tuple(reversed(w)))
        assert sum(d * form.b ** j for j, d in enumerate(digits)) == n
        assert sum(c * U[i] for i, c in enumerate(reversed(w))) == n


def test_normalization_transducer():
    t = normalization_transducer(4, 9)
    for word in itertools.product(range(10), repeat=3):
        out = t.apply(word)
        assert all(0 <= d < 4 for d in out)
        assert sum(d * 4 ** j for j, d in enumerate(out)) == sum(d * 4 ** j for j, d in enumerate(word))
    with pytest.raises(ValueError):
        normalization_transducer(1, 3)


def test_base_rep_and_residue_dfa():
    assert base_rep(0, 6) == () and base_rep(37, 6) == (1, 0, 1)
    d = base_residue_dfa(6, 5, [2])
    assert all(d.accepts(base_rep(n, 6)) == (n % 5 == 2) for n in range(500))


@pytest.mark.parametrize("name", ["merge", "noth2ok"])
def test_reduce_small_moduli(name):
    s = named(name)
    form = detect_merge_form(s)
    lang = default_language(s)
    for Q in (1, 2, 3, 5):
        for r in range(Q):
            got = reduce_to_base(s, form, congruence_dfa(s, Q, r, lang), lang)
            assert fa.equivalent(got, base_residue_dfa(form.b, Q, [r]))[0], (Q, r)


def test_reduce_universal():
    s = named("merge")
    lang = default_language(s)
    got = fa.minimize(reduce_to_base(s, detect_merge_form(s), lang.dfa, lang))
    assert got.n == 1 and got.final.all()


def test_merge_form_flag():
    f = MergeForm(6, 2, 0, False, 60)
    assert f.exactness == "horizon-verified"
