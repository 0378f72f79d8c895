import random

import pytest

from linnum import automata as fa
from linnum.automata import Dfa
from linnum.decider import (INCONCLUSIVE, NOT_UP, UP, DecideConfig, NotSubsetOfNumerationLanguage,
                            UpSetSpec, build_up_set_dfa, decide, minimal_period,
                            oracle_membership, period_test)
from linnum.langs import default_language
from linnum.systems import named


@pytest.fixture(scope="module")
def langs():
    return {n: default_language(named(n)) for n in ("fib", "toy", "merge", "lam")}


def powers_dfa(m):
    """0^* 1 0^*: the terms U_i themselves."""
    return Dfa(m, [[0, 1] + [2] * (m - 2), [1] + [2] * (m - 1), [2] * m], 0, [1])


def even_length_dfa(m):
    """Words of even length after stripping leading zeros."""
    return Dfa(m, [[0] + [1] * (m - 1), [2] * m, [1] * m], 0, [0, 2])


def test_upsetspec():
    s = UpSetSpec(3, 4, frozenset({1, 2}), frozenset({0}))
    assert [n in s for n in range(10)] == [True, False, False, False, False, True, True, False, False, True]
    assert s.bits(4) == [1, 0, 0, 0, 0]
    with pytest.raises(ValueError):
        UpSetSpec(0, 0, frozenset())
    with pytest.raises(ValueError):
        UpSetSpec(0, 3, frozenset({3}))
    with pytest.raises(ValueError):
        UpSetSpec(2, 3, frozenset(), frozenset({2}))


def test_minimal_period():
    assert minimal_period(6, {0, 2, 4}) == (2, frozenset({0}))
    assert minimal_period(6, set()) == (1, frozenset())
    assert minimal_period(6, set(range(6))) == (1, frozenset({0}))
    assert minimal_period(5, {1}) == (5, frozenset({1}))


@pytest.mark.parametrize("name", ["fib", "toy", "merge"])
def test_build_matches_oracle(name, langs):
    s = named(name)
    rng = random.Random(7)
    for _ in range(5):
        pi = rng.randint(1, 9)
        a = rng.randint(0, 30)
        spec = UpSetSpec(a, pi, frozenset(r for r in range(pi) if rng.random() < 0.5),
                         frozenset(n for n in range(a) if rng.random() < 0.5))
        d = build_up_set_dfa(s, spec, langs[name])
        assert oracle_membership(s, d, 400) == spec.bits(400)


@pytest.mark.parametrize("name", ["fib", "toy", "merge", "lam"])
def test_decide_round_trip(name, langs):
    s = named(name)
    rng = random.Random(name)
    for _ in range(4):
        pi = rng.choice([1, 2, 3, 4, 6])
        a = rng.randint(0, 20)
        spec = UpSetSpec(a, pi, frozenset(r for r in range(pi) if rng.random() < 0.5),
                         frozenset(n for n in range(a) if rng.random() < 0.5))
        d = build_up_set_dfa(s, spec, langs[name])
        v = decide(s, d, langs[name])
        assert v.outcome == UP
        assert fa.equivalent(build_up_set_dfa(s, v.witness, langs[name]), d)[0]
        # the witness is normalized: minimal period and preperiod
        assert v.witness.period == minimal_period(pi, spec.residues)[0]
        assert v.witness.preperiod <= spec.preperiod


@pytest.mark.parametrize("name", ["fib", "lam"])
@pytest.mark.parametrize("make", [powers_dfa, even_length_dfa])
def test_non_periodic_refuted_gcd_one(name, make, langs):
    ld = langs[name].dfa
    v = decide(named(name), fa.intersect(make(ld.m), ld), langs[name])
    assert v.outcome == NOT_UP and v.witness is None


@pytest.mark.parametrize("make", [powers_dfa, even_length_dfa])
def test_non_periodic_toy_never_accepted(make, langs):
    ld = langs["toy"].dfa
    v = decide(named("toy"), fa.intersect(make(ld.m), ld), langs["toy"])
    assert v.outcome in (NOT_UP, INCONCLUSIVE)
    assert v.outcome != UP


def test_rejects_non_greedy_input(langs):
    # 2 is not a Fibonacci digit pattern: 11 is never greedy
    d = fa.words_dfa(2, [(1, 1)])
    with pytest.raises(NotSubsetOfNumerationLanguage) as exc:
        decide(named("fib"), d, langs["fib"])
    assert exc.value.word[-2:] == (1, 1)


def test_period_test(langs):
    s = named("fib")
    spec = UpSetSpec(5, 3, frozenset({1}), frozenset({0, 2}))
    d = build_up_set_dfa(s, spec, langs["fib"])
    pre, res = period_test(s, d, langs["fib"], 6)
    assert res == frozenset({1, 4}) and pre <= 5
    assert period_test(s, d, langs["fib"], 4) is None


def test_machine_output(langs):
    s = named("fib")
    d = build_up_set_dfa(s, UpSetSpec(0, 2, frozenset({0})), langs["fib"])
    cfg = DecideConfig()
    text = decide(s, d, langs["fib"], config=cfg).machine(cfg)
    lines = text.splitlines()
    assert lines[:5] == ["outcome=UltimatelyPeriodic", "period=2", "preperiod=0", "residues=0",
                         "exceptions="]
    assert "config.period_cap=20000" in lines
    assert text == decide(s, d, langs["fib"], config=cfg).machine(cfg)
