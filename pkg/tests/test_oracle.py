from fractions import Fraction

import pytest

from floralperc.model import B, Y, ModelParams
from floralperc.oracle import (
    BalanceInfeasible,
    Diamond,
    Rule,
    all_petal_sets,
    binary_uniqueness,
    conditional_transmission_prob,
    extensions,
    fkg_counterexample,
    flower_domain,
    micro_duality,
    next_nearest_ports_value,
    opposite_ports_value,
    predetermined,
    reverse_outside,
    sets_avoiding,
    solve_star_rules,
    starred_prob,
    transmission_prob,
    verify_full_flower_better,
    verify_path_fkg_small,
    balance_holds,
)

F = Fraction
S_VALUES = [F(0), F(1, 20), F(1, 10), F(1, 6)]


def test_petal_set_count():
    # 877 collections of disjoint nonempty subsets of six petals, minus the empty one
    assert len(all_petal_sets()) == 876


def test_adjacent_pair(params):
    assert transmission_prob([[1, 2]], B, params) == F(1, 4)


def test_through_iris_pair(params):
    eta = (B, Y, B, Y, Y, Y)
    assert conditional_transmission_prob([[1, 3]], Diamond.of({}), eta, B, params) == params.b + params.s == F(9, 20)


@pytest.mark.parametrize("s", [F(1, 20), F(1, 7)])
def test_color_parity(s):
    p = ModelParams(s)
    for d in all_petal_sets():
        assert transmission_prob(d, B, p) == transmission_prob(d, Y, p)


def test_binary_uniqueness_and_duality():
    assert binary_uniqueness(B) and binary_uniqueness(Y)
    assert micro_duality()


def test_triggering_scenario(params):
    dia = Diamond.of({5: Y})
    eta = (Y, B, B, Y, Y, B)
    assert conditional_transmission_prob([[2, 3, 6]], dia, eta, B, params) == F(1, 2)
    bar = reverse_outside(eta, dia)
    assert conditional_transmission_prob([[2, 3, 6]], dia, bar, Y, params) == params.y + params.s


def test_shared_iris_scenario(params):
    y, s = params.y, params.s
    dia = Diamond.of({1: Y, 3: Y}, iris_pair=(1, 3), iris_color=Y)
    eta = (Y, Y, Y, B, Y, B)
    assert conditional_transmission_prob([[4, 6]], dia, eta, B, params) == s / (y + s)
    assert conditional_transmission_prob([[4, 6]], dia, reverse_outside(eta, dia), Y, params) == y / (y + s)


def test_predetermined_ignores_rules(params):
    dia = Diamond.of({3: B})
    table = solve_star_rules([[1, 2]], dia, params)
    for eta in extensions(dia):
        if eta[0] == eta[1] == B:
            assert predetermined([[1, 2]], dia, eta, B)
            assert conditional_transmission_prob([[1, 2]], dia, eta, B, params, table) == 1


@pytest.mark.parametrize("s", [F(1, 20), F(1, 10), F(1, 6)])
def test_close_encounter_rule(s):
    p = ModelParams(s)
    table = solve_star_rules([[2, 5]], Diamond.of({1: Y}), p)
    rule = table.rule((Y, Y, B, B, Y, Y))
    assert rule == Rule("no-close", s / (2 * p.y + 4 * s))
    assert balance_holds(table)


@pytest.mark.parametrize("s", [F(1, 20), F(1, 10), F(1, 6)])
def test_iris_use_rule(s):
    p = ModelParams(s)
    dia = Diamond.of({1: Y, 3: Y}, iris_pair=(1, 3), iris_color=Y)
    table = solve_star_rules([[4, 6]], dia, p)
    assert table.rule((Y, Y, Y, Y, B, Y)) == Rule("iris", s / p.y)
    assert balance_holds(table)


def test_values_at_tenth(params):
    assert solve_star_rules([[2, 5]], Diamond.of({1: Y}), params).rule((Y, Y, B, B, Y, Y)).p == F(1, 11)
    dia = Diamond.of({1: Y, 3: Y}, iris_pair=(1, 3), iris_color=Y)
    assert solve_star_rules([[4, 6]], dia, params).rule((Y, Y, Y, Y, B, Y)).p == F(2, 7)


def test_yellow_diamond_leaves_blue_transmissions_alone(params):
    for dia in (Diamond.of({1: Y}), Diamond.of({1: Y, 4: Y}), Diamond.of({1: Y, 2: Y})):
        for d in sets_avoiding(dia.mask):
            table = solve_star_rules(d, dia, params)
            assert all(0 <= r.p <= 1 for r in table.entries.values())
            for eta in extensions(dia):
                starred = conditional_transmission_prob(d, dia, eta, B, params, table)
                assert starred == conditional_transmission_prob(d, dia, eta, B, params)


def test_rejects_bad_input(params):
    with pytest.raises(ValueError):
        solve_star_rules([[1, 2]], Diamond.of({1: B}), params)
    with pytest.raises(ValueError):
        conditional_transmission_prob([[2, 3]], Diamond.of({1: B}), (Y,) * 6, B, params)
    with pytest.raises(ValueError):
        conditional_transmission_prob([[2, 3]], Diamond.of({}), (Y,) * 5, B, params)
    assert issubclass(BalanceInfeasible, ValueError)


@pytest.mark.parametrize("s", S_VALUES)
def test_closed_forms(s):
    p = ModelParams(s)
    b = p.b
    assert next_nearest_ports_value(p) == F(1, 8) * (1 + 2 * F(1, 2) + 2 * (b + s) + 3 * (b + 2 * s)) == (9 + s) / 16
    assert opposite_ports_value(p) == F(1, 4) + F(3, 4) * (F(1, 4) + (b + s) / 4 + (b + 2 * s) / 2)
    cond, uncond = fkg_counterexample(p)
    assert cond == F(1, 4) * (1 + F(1, 2) + 2 * (p.a + 2 * s))
    assert uncond == F(1, 32) * (5 * F(1, 2) + 8 + 19 * (p.a + 2 * s))
    assert (cond < uncond) == (s > 0)


def test_closed_form_numbers(params):
    assert next_nearest_ports_value(params) == F(91, 160)  # 0.56875
    assert opposite_ports_value(params) == F(233, 320)  # 0.728125
    assert fkg_counterexample(params) == (F(13, 20), F(419, 640))  # 0.65, 0.6546875
    assert fkg_counterexample(ModelParams(0)) == (F(5, 8), F(5, 8))


def test_full_flower_single_cases(params):
    ok, lhs, rhs = verify_full_flower_better([[2, 6]], Diamond.of({1: Y}), params)
    assert ok and lhs <= rhs
    # an adjacent pair never needs the iris or the diamond: equality
    p0 = ModelParams(0)
    ok, lhs, rhs = verify_full_flower_better([[1, 2]], Diamond.of({4: Y}), p0)
    assert ok and lhs == rhs == F(1, 4)
    # blocking the long way round makes it strict
    ok, lhs, rhs = verify_full_flower_better([[2, 4]], Diamond.of({6: Y}), p0)
    assert ok and lhs < rhs


def test_starred_without_rules_is_plain(params):
    dia = Diamond.of({1: Y})
    v = starred_prob([[2, 5]], dia, B, params)
    assert 0 < v < 1


def test_path_fkg(params):
    dom, arr = flower_domain()
    petals = next(iter(arr.irises)).neighbors()
    pairs = [([petals[0]], [petals[3]]), ([petals[1]], [petals[4]])]
    ok, worst = verify_path_fkg_small(dom, arr, pairs, params)
    assert ok and worst >= 0
