"""Acceptance suite: one test per criterion, tolerances as pinned in the requirements.

Exact criteria use zero tolerance in rational arithmetic.  Statistical ones
use fixed seeds, so a run is reproducible bit for bit.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from floralperc.estimator import (
    arm_decay_study,
    cardy_study,
    contour_self_tests,
    contour_vanishing_study,
    corner_contour,
    estimate_events,
    rsw_study,
)
from floralperc.events import crossing_event, exact_probs, ring_spec, separation_spec
from floralperc.lattice import (
    HexCoord,
    build_hexagon_domain,
    build_triangle_domain,
    periodic_floral_arrangement,
    ring,
)
from floralperc.model import B, Y, ModelParams, S_MAX, iris_law, petals_from_code
from floralperc import oracle
from floralperc.topology import Topology, sample_batch

F = Fraction
S_TENTH = F(1, 10)
S_NEAR_MAX = F(S_MAX - 1e-6).limit_denominator(10**9)
LEGAL_S = (F(1, 20), S_TENTH, S_NEAR_MAX)


def test_1_oracle_exact_identities():
    t0 = time.perf_counter()
    p = ModelParams(S_TENTH)
    sets = oracle.all_petal_sets()
    assert len(sets) == 876
    for d in sets:
        assert oracle.transmission_prob(d, B, p) == oracle.transmission_prob(d, Y, p), d
    assert oracle.binary_uniqueness(B) and oracle.binary_uniqueness(Y)
    assert oracle.micro_duality()
    assert time.perf_counter() - t0 < 60


def test_2_star_rule_recovery():
    p = ModelParams(S_TENTH)
    y, s = p.y, p.s
    close = oracle.solve_star_rules([[2, 5]], oracle.Diamond.of({1: Y}), p).rule((Y, Y, B, B, Y, Y))
    assert close.action == "no-close" and close.p == s / (2 * y + 4 * s) == F(1, 11)
    dia = oracle.Diamond.of({1: Y, 3: Y}, iris_pair=(1, 3), iris_color=Y)
    iris = oracle.solve_star_rules([[4, 6]], dia, p).rule((Y, Y, Y, Y, B, Y))
    assert iris.action == "iris" and iris.p == s / y == F(2, 7)
    for s_val in LEGAL_S:
        sweep = oracle.star_rule_sweep(ModelParams(s_val))
        assert sweep.cases > 9000
        assert not sweep.infeasible, sweep.infeasible[:3]
        assert not sweep.unbalanced, sweep.unbalanced[:3]


def test_3_closed_form_tallies():
    p = ModelParams(S_TENTH)
    b, s = p.b, p.s
    gt = oracle.next_nearest_ports_value(p)
    assert gt == F(1, 8) * (1 + 2 * F(1, 2) + 2 * (b + s) + 3 * (b + 2 * s)) == (9 + s) / 16
    assert gt == F("0.56875")
    op = oracle.opposite_ports_value(p)
    assert op == F(1, 4) + F(3, 4) * (F(1, 4) + F(1, 4) * (b + s) + F(1, 2) * (b + 2 * s))
    assert op == F("0.728125")
    assert oracle.fkg_counterexample(p) == (F("0.65"), F("0.6546875"))


@pytest.mark.slow
def test_4_full_flower_inequality():
    for s_val in LEGAL_S:
        n, violations = oracle.full_flower_sweep(ModelParams(s_val))
        assert n > 18000
        assert not violations, [(v[0], v[1].colors, v[2], v[3], v[4]) for v in violations[:3]]


def _sampler_patch_classes(p, n, seed):
    dom, arr = oracle.flower_domain()
    topo = Topology.build(dom, arr)
    rng = np.random.default_rng(seed)
    colors, states = sample_batch(topo, p, rng, n)
    code = np.zeros(n, np.int64)
    for k in range(6):
        code |= colors[:, topo.petals[0, k]].astype(np.int64) << k
    return np.bincount(code * 5 + states[:, 0], minlength=64 * 5)


@pytest.mark.slow
def test_5_sampler_matches_oracle():
    t0 = time.perf_counter()
    p = ModelParams(S_TENTH)
    n = 10**6
    counts = _sampler_patch_classes(p, n, 501)
    for c in range(64):
        law = iris_law(petals_from_code(c), p)
        for st in range(5):
            w = float(F(1, 64) * law.get(st, 0))
            k = counts[c * 5 + st]
            if w == 0:
                assert k == 0
                continue
            assert abs(k / n - w) <= 4 * math.sqrt(w * (1 - w) / n), (c, st)

    cases = []
    tri = build_triangle_domain(5)
    tri_arr = periodic_floral_arrangement(tri, 3, origin=HexCoord(1, 1))
    arcs = (tri.boundaryA, tri.boundaryB, tri.boundaryC)
    z = [v for v in tri.interior_vertices() if abs(v.z - HexCoord(1, 1).center) < 0.6][0]
    cases.append((tri, tri_arr, [
        crossing_event(tri.boundaryA, tri.boundaryB, B),
        crossing_event(tri.boundaryB, tri.boundaryC, Y),
        separation_spec(z, arcs, B),
        separation_spec(z, arcs, Y),
    ]))
    hx = build_hexagon_domain(2)
    hx_arr = periodic_floral_arrangement(hx, 3)
    centre = [HexCoord(0, 0)]
    cases.append((hx, hx_arr, [
        ring_spec(centre, ring(HexCoord(0, 0), 2), B),
        ring_spec(centre, ring(HexCoord(0, 0), 2), Y),
        crossing_event([HexCoord(1, 0)], [HexCoord(-2, 1)], B),
    ]))
    for k, (dom, arr, specs) in enumerate(cases):
        assert len(dom.hexes) <= 22 and len(arr.irises) == 1
        exact = exact_probs(Topology.build(dom, arr), specs, p)
        ests = estimate_events(dom, arr, p, specs, 200_000, 600 + k)
        for sp, e, q in zip(specs, ests, exact):
            q = float(q)
            assert 0 < q < 1
            assert abs(e.mean - q) <= 3 * math.sqrt(q * (1 - q) / e.n), (sp.label, e.mean, q)
    assert time.perf_counter() - t0 < 120


def test_6_color_parity_at_scale():
    p = ModelParams(S_TENTH)
    rows = rsw_study([1.0], [20, 40], p, 10_000, 606)
    for N in (20, 40):
        for way in ("easy", "hard"):
            b, y = (next(r["estimate"] for r in rows if r["N"] == N and r["way"] == way and r["color"] == c)
                    for c in "BY")
            assert abs(b.mean - y.mean) <= 3 * math.hypot(b.stderr, y.stderr), (N, way, b, y)


@pytest.mark.slow
def test_7_criticality_band_and_arm_decay():
    p = ModelParams(S_TENTH)
    rows = rsw_study([math.sqrt(3) / 2], [20, 40, 80], p, 10_000, 707)
    for color in "BY":
        ests = [r["estimate"] for r in rows if r["way"] == "easy" and r["color"] == color]
        assert all(0.25 <= e.mean <= 0.95 for e in ests), ests
        means = [e.mean for e in ests]
        monotone = all(a < b for a, b in zip(means, means[1:])) or all(a > b for a, b in zip(means, means[1:]))
        drift = abs(means[-1] - means[0])
        assert not (monotone and drift > 3 * math.hypot(ests[0].stderr, ests[-1].stderr)), ests

    arms = arm_decay_study([8, 16, 32, 64], 1, p, 10_000, 708)
    assert not arms.censored
    assert arms.slope < 0 and arms.slope + 2 * arms.slope_err < 0, (arms.slope, arms.slope_err)
    for a, b in zip(arms.estimates, arms.estimates[1:]):
        assert b.mean <= a.mean + 2 * math.hypot(a.stderr, b.stderr)


@pytest.mark.slow
def test_8_cardy_convergence():
    t0 = time.perf_counter()
    rows, _ = cardy_study([15, 30, 60], ModelParams(S_TENTH), 30_000, 808, period=3)
    errs = [r.max_err["u"] for r in rows]
    devs = [r.sum_dev for r in rows]
    assert all(b <= a for a, b in zip(errs, errs[1:])), errs
    assert errs[-1] <= 0.05, errs
    assert all(b <= a for a, b in zip(devs, devs[1:])), devs
    assert time.perf_counter() - t0 < 15 * 60


@pytest.mark.slow
def test_9_contour_vanishing():
    for N in (15, 30, 60):
        for name, value, exact in contour_self_tests(corner_contour(N), N):
            assert abs(value - exact) < 1e-12, (N, name)
    rows = contour_vanishing_study([15, 60], ModelParams(S_TENTH), [300_000, 100_000], 909, contour="corner")
    first, last = (next(r for r in rows if r["N"] == N and r["pair"] == "u-tau2v") for N in (15, 60))
    assert first["abs"] - last["abs"] > 2 * math.hypot(first["stderr"], last["stderr"]), (first, last)
