import math

import pytest
from hypothesis import given, strategies as st

from floralperc.lattice import (
    HexCoord,
    Vertex,
    build_annulus_domain,
    build_hexagon_domain,
    build_parallelogram_domain,
    build_rectangle_domain,
    build_triangle_domain,
    edge_midpoint,
    flower,
    hex_vertex,
    is_connected,
    is_simply_connected,
    load_json,
    periodic_floral_arrangement,
    ring,
    save_json,
    validate_arrangement,
    vertex_hexes,
    FloralArrangement,
)

coords = st.builds(HexCoord, st.integers(-50, 50), st.integers(-50, 50))


@given(coords, coords)
def test_distance_symmetric_and_rotation_invariant(a, b):
    assert a.distance(b) == b.distance(a)
    assert a.rotate60().distance(b.rotate60()) == a.distance(b)
    assert a.reflect_y().distance(b.reflect_y()) == a.distance(b)


@given(coords)
def test_six_rotations_return_home(h):
    g = h
    for _ in range(6):
        g = g.rotate60()
    assert g == h


@given(coords, st.integers(0, 5))
def test_vertex_geometry(h, j):
    v = hex_vertex(h, j)
    # unit hexagon spacing, side 1/sqrt(3)
    assert abs(v.z - h.center) == pytest.approx(1 / math.sqrt(3))
    assert (h, j) in vertex_hexes(v)
    assert len(vertex_hexes(v)) == 3
    # edge k joins corners k-1 and k
    m = edge_midpoint(h, j)
    a, b = hex_vertex(h, (j - 1) % 6), hex_vertex(h, j)
    assert m.z == pytest.approx((a.z + b.z) / 2)


def test_neighbor_centres_at_unit_distance():
    h = HexCoord(2, -1)
    for n in h.neighbors():
        assert abs(n.center - h.center) == pytest.approx(1.0)
        assert h.distance(n) == 1


def test_triangle_domain_arcs():
    N = 6
    d = build_triangle_domain(N)
    assert len(d) == (N + 1) * (N + 2) // 2
    arcs = d.boundaryA + d.boundaryB + d.boundaryC
    assert len(arcs) == len(set(arcs)) == 3 * N
    assert set(arcs) == d.boundary()
    assert all(h.q + h.r == N for h in d.boundaryA)
    assert all(h.q == 0 for h in d.boundaryB)
    assert all(h.r == 0 for h in d.boundaryC)
    assert is_simply_connected(d.hexes)


def test_small_triangle_rejected():
    with pytest.raises(ValueError):
        build_triangle_domain(3)


def test_interior_vertices_have_three_hexes():
    d = build_triangle_domain(5)
    for v in d.interior_vertices():
        assert all(h in d for h, _ in vertex_hexes(v))


def test_other_shapes():
    hx = build_hexagon_domain(3)
    assert len(hx) == 1 + 3 * 3 * 4
    assert set(hx.sides["outer"]) == set(ring(HexCoord(0, 0), 3))
    an = build_annulus_domain(1, 3)
    assert is_connected(an.hexes) and not is_simply_connected(an.hexes)
    pg = build_parallelogram_domain(4, 3)
    assert len(pg) == 12
    rc = build_rectangle_domain(5, 4)
    assert is_connected(rc.hexes)
    assert len(rc.sides["left"]) == len(rc.sides["right"]) == 4
    with pytest.raises(ValueError):
        build_rectangle_domain(1, 4)


def test_ring_sizes():
    assert ring(HexCoord(0, 0), 0) == [HexCoord(0, 0)]
    for n in range(1, 6):
        r = ring(HexCoord(1, 1), n)
        assert len(r) == len(set(r)) == 6 * n
        assert all(h.distance(HexCoord(1, 1)) == n for h in r)


def test_periodic_arrangement_is_legal_and_symmetric():
    d = build_triangle_domain(12)
    arr = periodic_floral_arrangement(d, 3)
    assert not validate_arrangement(d, arr)
    assert len(arr) > 0
    assert all(not d.is_boundary(h) for h in arr.irises)
    # the triangle is invariant under 120 degree rotation about its centre; so is the sublattice
    for h in arr.irises:
        g = h.rotate60().rotate60()
        g = HexCoord(g.q + d.N, g.r)
        assert g in arr.irises
    with pytest.raises(ValueError):
        periodic_floral_arrangement(d, 2)


def test_validate_reports_violations():
    d = build_hexagon_domain(3)
    arr = FloralArrangement(frozenset({HexCoord(0, 0), HexCoord(1, 1), HexCoord(3, 0), HexCoord(9, 9)}), 3)
    msgs = validate_arrangement(d, arr)
    assert any("distance" in m for m in msgs)
    assert any("boundary" in m for m in msgs)
    assert any("outside" in m for m in msgs)


def test_flower_is_petal_ring():
    assert set(flower(HexCoord(2, 2))) == set(ring(HexCoord(2, 2), 1))


def test_json_round_trip(tmp_path):
    d = build_triangle_domain(7)
    arr = periodic_floral_arrangement(d, 3)
    p = tmp_path / "dom.json"
    save_json(p, d, arr)
    d2, arr2 = load_json(p)
    assert d2 == d and arr2 == arr


def test_vertex_is_refined_grid_point():
    v = Vertex(2, 2)
    assert v.z == pytest.approx(complex(0.5, 2 / (4 * math.sqrt(3))))
