import math
from fractions import Fraction

import numpy as np
import pytest

from floralperc.estimator import (
    CHUNK,
    Estimate,
    _chunks,
    arm_decay_study,
    coarse_grid,
    contour_vanishing_study,
    corner_contour,
    estimate_cardy_field,
    estimate_event,
    estimate_events,
    loglog_slope,
    rectangle_for,
    rsw_study,
    triangle_contour,
)
from floralperc.events import crossing_event, separation_spec
from floralperc.lattice import build_hexagon_domain, build_triangle_domain, periodic_floral_arrangement, ring, HexCoord
from floralperc.model import B, Y


def test_estimate_from_counts():
    e = Estimate.from_counts(25, 100)
    assert e.mean == 0.25 and e.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
    assert Estimate.from_counts(0, 10).stderr == 0
    with pytest.raises(ValueError):
        Estimate.from_counts(0, 0)


def test_chunks_cover_budget_and_are_seeded():
    ch = _chunks(2 * CHUNK + 7, 5)
    assert [n for n, _ in ch] == [CHUNK, CHUNK, 7]
    again = _chunks(2 * CHUNK + 7, 5)
    assert [s.generate_state(2).tolist() for _, s in ch] == [s.generate_state(2).tolist() for _, s in again]
    with pytest.raises(ValueError):
        _chunks(0, 1)


def test_worker_count_does_not_change_counts(params):
    dom = build_hexagon_domain(5)
    arr = periodic_floral_arrangement(dom, 3)
    ev = [crossing_event(ring(HexCoord(0, 0), 1), dom.sides["outer"], c) for c in (B, Y)]
    serial = estimate_events(dom, arr, params, ev, 3500, 42, workers=1)
    threaded = estimate_events(dom, arr, params, ev, 3500, 42, workers=3)
    assert serial == threaded
    other = estimate_events(dom, arr, params, ev, 3500, 43, workers=1)
    assert other != serial


def test_malformed_event_rejected(params):
    dom = build_hexagon_domain(2)
    arr = periodic_floral_arrangement(dom, 3)
    with pytest.raises(ValueError, match="malformed"):
        estimate_events(dom, arr, params, ["crossing"], 10, 0)


def test_shared_field_matches_per_vertex_estimates(params):
    N = 8
    dom = build_triangle_domain(N)
    arr = periodic_floral_arrangement(dom, 3)
    verts = dom.interior_vertices()[::7]
    n, seed = 2500, 9
    fe = estimate_cardy_field(dom, arr, params, verts, n, seed)
    A, Bs, C = dom.boundaryA, dom.boundaryB, dom.boundaryC
    arcs = {"u": (A, Bs, C), "v": (Bs, C, A), "w": (C, A, Bs)}
    for which, a in arcs.items():
        for col in (B, Y):
            specs = [separation_spec(v, a, col) for v in verts]
            ests = estimate_events(dom, arr, params, specs, n, seed)
            # same sampling stream, so the counts agree exactly
            assert [e.successes for e in ests] == [fe.point(which, i, col).successes for i in range(len(verts))]
    m, se = fe.estimate("u")
    assert np.allclose(m, (fe.estimate("u", B)[0] + fe.estimate("u", Y)[0]) / 2)
    assert np.all(se >= 0)


def test_field_rejects_bad_input(params):
    dom = build_hexagon_domain(4)
    arr = periodic_floral_arrangement(dom, 3)
    with pytest.raises(ValueError, match="triangle"):
        estimate_cardy_field(dom, arr, params, None, 10)
    tri = build_triangle_domain(6)
    arr = periodic_floral_arrangement(tri, 3)
    edge_vertex = [v for v in tri.all_vertices() if v not in set(tri.interior_vertices())][0]
    with pytest.raises(ValueError, match="interior"):
        estimate_cardy_field(tri, arr, params, [edge_vertex], 10)


def test_coarse_grid_is_common():
    g15 = coarse_grid(15)
    g60 = coarse_grid(60)
    assert len(g15) == len(g60) == len(build_triangle_domain(15).interior_vertices())
    z15 = np.array([v.z for v in g15]) / 15
    z60 = np.array([v.z for v in g60]) / 60
    assert np.max(np.abs(z15 - z60)) < 1 / 60
    assert set(g60) <= set(build_triangle_domain(60).interior_vertices())


def test_contours_inside_domain():
    for N in (15, 30, 60):
        inner = set(build_triangle_domain(N).interior_vertices())
        for c in (corner_contour(N), triangle_contour(N)):
            assert set(c.vertices) <= inner


def test_loglog_slope_recovers_power():
    xs = [8, 16, 32, 64]
    ests = [Estimate(0.5 * x**-0.3, 0.001, 10**6, int(0.5 * x**-0.3 * 10**6)) for x in xs]
    slope, err, censored = loglog_slope(xs, ests)
    assert slope == pytest.approx(-0.3, abs=1e-9)
    assert err > 0 and not censored
    ests[-1] = Estimate(0.0, 0.0, 100, 0)
    slope, _, censored = loglog_slope(xs, ests)
    assert censored == [64] and slope == pytest.approx(-0.3, abs=1e-9)
    assert loglog_slope([1, 2], [Estimate(0, 0, 5, 0)] * 2)[0] is None


def test_arm_study(params):
    st = arm_decay_study([2, 4, 8], 1, params, 2000, 1)
    means = [e.mean for e in st.estimates]
    assert means[0] >= means[1] >= means[2]
    assert st.slope < 0
    with pytest.raises(ValueError):
        arm_decay_study([4, 2], 1, params, 10, 1)


def test_rectangles_and_crossings(params):
    d = rectangle_for(20, math.sqrt(3) / 2)
    assert len(d.sides["left"]) == 20
    rows = rsw_study([1.0], [8], params, 3000, 2)
    by = {(r["way"], r["color"]): r["estimate"] for r in rows}
    # a hard-way yellow crossing blocks an easy-way blue one and vice versa
    assert by[("easy", "B")].mean + by[("hard", "Y")].mean == pytest.approx(1)
    assert by[("easy", "Y")].mean + by[("hard", "B")].mean == pytest.approx(1)


def test_contour_study_rows(params):
    rows = contour_vanishing_study([10], params, 300, 1)
    assert {r["pair"] for r in rows} == {"u-tau2v", "v-tau2w", "w-tau2u"}
    for r in rows:
        assert r["abs"] == pytest.approx(abs(r["value"]))
        assert r["stderr"] > 0 and r["n"] == 300


def test_single_event_estimate(params):
    dom = build_triangle_domain(5)
    arr = periodic_floral_arrangement(dom, 3)
    e = estimate_event(dom, arr, params, crossing_event(dom.boundaryA, dom.boundaryB, B), 500, 3)
    assert 0 < e.mean < 1 and e.n == 500
