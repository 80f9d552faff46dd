import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import zeta

from linecomplex.complex_core import Color
from linecomplex.exhaustion import limit_estimate, wreath_exhaust
from linecomplex.explore import explore_ball
from linecomplex.hurwitz import MonodromyDatum, build_from_monodromy
from linecomplex.rules import (ScheduleInvalid, SpeiserRule, TableRule, block_rule, exp_rule,
                               modular_rule, tree_rule)
from linecomplex.type_criterion import (Assessment, InfiniteChainDetected, NotRegular,
                                        PaddingSchedule, TypeVerdict, Verdict, chain_profile,
                                        check_conditions, classify_regular, counterexample_family,
                                        nevanlinna_conjecture_eval, teichmueller_verdict,
                                        to_speiser_tree)

ZERO = PaddingSchedule("zero")


def harmonic2(K):
    return sum(Fraction(1, k * k) for k in range(1, K + 1))


def infinite_chain_rule():
    # every vertex: one edge on side 0, a bundle of two on sides 1, 2
    rows = {"a": (Color.INNER, ["b", "b@-1", "b@-1"]),
            "b": (Color.OUTER, ["a", "a@+1", "a@+1"])}
    return TableRule(3, rows, "a", name="ray")


# Speiser tree


def test_modular_tree_unchanged():
    rule = modular_rule()
    t = to_speiser_tree(rule)
    v = t.base
    assert [t.weight(v, s) for s in range(3)] == [1, 1, 1]
    assert [t.neighbor(v, s) for s in range(3)] == [rule.neighbor(v, s) for s in range(3)]


def test_constant_chains_give_uniform_weights():
    t = to_speiser_tree(counterexample_family(3, 5, ZERO))
    layer = [t.base]
    for _ in range(3):
        nxt = []
        for v in layer:
            assert [t.weight(v, s) for s in range(3)] == [5, 5, 5]
            nxt.extend(t.neighbor(v, s) for s in range(3))
        layer = nxt[:6]


def test_weighted_edge_has_chain_length():
    rule = counterexample_family()
    t = to_speiser_tree(rule)
    assert t.weight(t.base, 0) == rule.length(1) == 101


@pytest.mark.parametrize("rule,radius", [
    (modular_rule(), 5),
    (counterexample_family(3, 3, ZERO), 12),
    (counterexample_family(4, 3, PaddingSchedule("power", 2, 0.5)), 14),
    (SpeiserRule(3, lambda k: 2 * k - 1), 12),
])
def test_expansion_round_trip(rule, radius):
    back = to_speiser_tree(rule).expand()
    a = explore_ball(rule, radius)
    b = explore_ball(back, radius)
    assert np.array_equal(a.nbr, b.nbr)
    assert [rule.color(k) for k in a.keys] == [back.color(k) for k in b.keys]


def test_infinite_chain_detected():
    with pytest.raises(InfiniteChainDetected) as info:
        to_speiser_tree(infinite_chain_rule(), bound=50)
    assert info.value.bound == 50


# conditions


def test_modular_conditions_hold():
    rep = check_conditions(modular_rule(), 4)
    assert rep.holds and not rep.witnesses


def test_finite_complex_is_algebraic():
    c = build_from_monodromy(MonodromyDatum.from_cycles(3, ["(123)", "(132)", "()"]))
    rep = check_conditions(c, 3)
    assert not rep.no_algebraic and "algebraic" in rep.witnesses


def test_degree_three_with_q_four():
    d = MonodromyDatum.from_cycles(3, ["(12)", "(23)", "(23)", "(12)"])
    rep = check_conditions(build_from_monodromy(d), 3)
    assert not rep.degrees_two_or_q
    v, deg = rep.witnesses["degree"]
    assert deg == 3


def test_infinite_chain_fails_condition_two():
    rep = check_conditions(infinite_chain_rule(), 20)
    assert not rep.no_infinite_unbranched_chain and "chain" in rep.witnesses


def test_condition_two_only_certified_to_bound():
    rule = counterexample_family()
    assert not check_conditions(rule, 60).no_infinite_unbranched_chain
    assert check_conditions(rule, 500, radius=150).holds


# chain profile


@pytest.mark.parametrize("q", [3, 4, 5])
def test_modular_profile(q):
    p = chain_profile(tree_rule(q), 6)
    assert p.phi == p.psi == [1] * 6
    assert p.partial_sums[-1] == harmonic2(6)
    assert p.b_counts == [1] + [q * (q - 1) ** (k - 1) for k in range(1, 7)]


def test_constant_chain_profile():
    p = chain_profile(counterexample_family(3, 3, ZERO), 5)
    assert p.psi == [3] * 5
    assert p.partial_sums[-1] == 3 * harmonic2(5)


def test_growing_chain_profile():
    p = chain_profile(SpeiserRule(3, lambda k: 2 * k - 1), 6)
    assert p.psi == [2 * k - 1 for k in range(1, 7)]
    assert p.partial_sums == [sum(Fraction(2 * k - 1, k * k) for k in range(1, K + 1))
                              for K in range(1, 7)]
    v = teichmueller_verdict(p, 6)
    assert v.value is Verdict.INCONCLUSIVE
    assert "no verdict on divergence" in v.reason


def test_profile_invariants_counterexample():
    rule = counterexample_family()
    p = chain_profile(rule, 5)
    assert all(a <= b for a, b in zip(p.psi, p.psi[1:]))
    assert all(s >= f for s, f in zip(p.psi, p.phi))
    assert all(a < b for a, b in zip(p.partial_sums, p.partial_sums[1:]))
    assert p.chain_lengths[0] == {101: 3}
    assert p.b_counts == [1, 3, 6, 12, 24, 48]


# verdicts


def test_bounded_psi_certificate():
    p = chain_profile(modular_rule(), 8)
    v = teichmueller_verdict(p, 8)
    assert v.value is Verdict.HYPERBOLIC
    assert v.evidence["certificate"] == "bounded psi"
    assert v.evidence["series_bound"] == pytest.approx(math.pi ** 2 / 6)
    assert float(p.partial_sums[-1]) <= math.pi ** 2 / 6


def test_certificate_stable_in_K():
    for K in range(2, 8):
        assert teichmueller_verdict(chain_profile(modular_rule(), K), K).value is Verdict.HYPERBOLIC


def test_profile_short_of_horizon():
    p = chain_profile(modular_rule(), 3)
    assert teichmueller_verdict(p, 10).value is Verdict.INCONCLUSIVE


def test_counterexample_declared_certificate():
    rule = counterexample_family()
    p = chain_profile(rule, 6)
    v = teichmueller_verdict(p, 6, rule.declared_psi)
    assert v.value is Verdict.HYPERBOLIC
    expected = math.pi ** 2 / 6 + 100 * zeta(1.5)
    assert v.evidence["series_bound"] == pytest.approx(expected)
    assert float(p.partial_sums[-1]) < expected
    # without the declared form the growing psi gives no certificate
    assert teichmueller_verdict(p, 6).value is Verdict.INCONCLUSIVE


def test_wrong_declared_bound_rejected():
    rule = counterexample_family()
    p = chain_profile(rule, 4)
    from linecomplex.type_criterion import PsiBound
    bad = PsiBound(lambda k: 50, 1.0, "psi <= 50")
    v = teichmueller_verdict(p, 4, bad)
    assert v.value is Verdict.INCONCLUSIVE and "fails at k = 1" in v.reason


def test_q4_constant_three():
    rule = counterexample_family(4, 3, ZERO)
    p = chain_profile(rule, 4)
    assert p.psi == [3] * 4
    v = teichmueller_verdict(p, 4)
    assert v.evidence["series_bound"] == pytest.approx(3 * math.pi ** 2 / 6)


@pytest.mark.parametrize("V,expected", [(2, Verdict.PARABOLIC), (3, Verdict.HYPERBOLIC),
                                        (Fraction(3, 2), Verdict.ELLIPTIC)])
def test_classify_regular(V, expected):
    v = classify_regular(V)
    assert v.value is expected and v.basis == "regular trichotomy"


def test_classify_regular_rejects_irregular():
    with pytest.raises(NotRegular):
        classify_regular(2, [2, 3])


def test_classify_regular_depth_independent():
    for depth in (1, 5, 30):
        r = wreath_exhaust(modular_rule(), depth=depth)
        assert classify_regular(r.V_seq[-1], r.vertex_values).value is Verdict.HYPERBOLIC


# conjecture


def test_conjecture_modular_confirms():
    r = wreath_exhaust(modular_rule(), depth=20)
    v = teichmueller_verdict(chain_profile(modular_rule(), 6), 6)
    a = nevanlinna_conjecture_eval(r, v)
    assert a.outcome is Assessment.CONFIRMS and a.E_est == -1


def test_conjecture_exp_confirms():
    r = wreath_exhaust(exp_rule(), depth=20)
    a = nevanlinna_conjecture_eval(r, classify_regular(2))
    assert a.outcome is Assessment.CONFIRMS and a.E_est == 0


def test_conjecture_counterexample_refutes():
    rule = counterexample_family()
    r = wreath_exhaust(rule, depth=200)
    v = teichmueller_verdict(chain_profile(rule, 6), 6, rule.declared_psi)
    a = nevanlinna_conjecture_eval(r, v, tolerance=Fraction(1, 100), window=50)
    assert a.outcome is Assessment.REFUTES


def test_conjecture_needs_convergence():
    r = wreath_exhaust(block_rule(3, 10, 1001), depth=3000)
    a = nevanlinna_conjecture_eval(limit_estimate(r, 1500), TypeVerdict(Verdict.HYPERBOLIC, "x"))
    assert a.outcome is Assessment.NOT_APPLICABLE


def test_conjecture_ignores_inconclusive_verdict():
    r = wreath_exhaust(exp_rule(), depth=10)
    a = nevanlinna_conjecture_eval(r, TypeVerdict(Verdict.INCONCLUSIVE, "x", reason="r"))
    assert a.outcome is Assessment.NOT_APPLICABLE


# family


@pytest.mark.parametrize("kwargs", [
    dict(q=3, chain_length=2),
    dict(q=4, chain_length=2),
    dict(q=2, chain_length=1),
    dict(q=3, chain_length=1, padding_schedule=PaddingSchedule("doubling", 1, 0)),
    dict(q=3, chain_length=1, padding_schedule=PaddingSchedule("power", 1, 1.0)),
    dict(q=3, chain_length=1, padding_schedule=PaddingSchedule("bogus")),
])
def test_invalid_schedules(kwargs):
    with pytest.raises(ScheduleInvalid):
        counterexample_family(**kwargs)


def test_zero_padding_is_modular():
    rule = counterexample_family(3, 1, ZERO)
    r = wreath_exhaust(rule, depth=30)
    assert set(r.V_seq) == {3}
    assert r.n_seq == wreath_exhaust(modular_rule(), depth=30).n_seq


def test_family_properties():
    rule = counterexample_family()
    assert check_conditions(rule, 1000, radius=120).holds
    r = wreath_exhaust(rule, depth=200)
    assert all(abs(v - 2) < Fraction(1, 100) for v in r.V_seq[-50:])
    assert r.vertex_values == {2, 3}


def test_b_counts_match_when_conditions_hold():
    for rule in (modular_rule(), tree_rule(4), counterexample_family(3, 3, ZERO),
                 counterexample_family(4, 1, PaddingSchedule("power", 3, 0.5))):
        if check_conditions(rule, 2000, cap=64, radius=3).holds:
            q = rule.q
            p = chain_profile(rule, 5)
            assert p.b_counts[1:] == [q * (q - 1) ** (k - 1) for k in range(1, 6)]


@pytest.mark.parametrize("q,c", [(3, 1), (3, 3), (3, 7), (4, 5)])
def test_bounded_chains_keep_mean_above_two(q, c):
    # B branch vertices carry at most q(c - 1) B chain vertices in any ball
    r = wreath_exhaust(counterexample_family(q, c, ZERO), depth=120)
    floor = 2 + Fraction(q - 2, 1 + q * (c - 1))
    assert all(v >= floor for v in r.V_seq)
