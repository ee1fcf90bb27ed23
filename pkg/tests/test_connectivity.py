"""Compiled event kernels against the pure-Python region-graph reference."""
import json
from fractions import Fraction

import numpy as np
import pytest

from floralperc.connectivity import (
    _components,
    build_region_graph,
    clusters,
    clusters_to_json,
    has_crossing,
    one_arm_event,
    ring_event,
    separation_event,
)
from floralperc.events import (
    compile_events,
    crossing_event,
    evaluate_batch,
    exact_probs,
    one_arm_spec,
    ring_spec,
    separation_spec,
)
from floralperc.lattice import (
    HexCoord,
    build_annulus_domain,
    build_hexagon_domain,
    build_rectangle_domain,
    build_triangle_domain,
    periodic_floral_arrangement,
    ring,
)
from floralperc.model import B, Y, Configuration, HexState, enumerate_configurations
from floralperc.oracle import flower_domain
from floralperc.topology import Topology, sample_batch


def _samples(dom, arr, params, n, seed):
    topo = Topology.build(dom, arr)
    colors, states = sample_batch(topo, params, np.random.default_rng(seed), n)
    return topo, colors, states


def _triangle_arcs(dom):
    return dom.boundaryA, dom.boundaryB, dom.boundaryC


def brute_separation(c, z, color, arcs) -> bool:
    """Search every self-avoiding ``color`` path from X to Y for one cutting z off from Z."""
    g = build_region_graph(c)
    X, Yarc, Z = arcs
    nb = g.neighbors()
    dst = set(g.regions_of(Yarc, color))
    at_z = g.regions_at(z)
    z_regions = g.regions_of(Z)
    pairs = [tuple(p) for p in g.adjacency] + list(g.chords)
    n = len(g.regions)

    def cuts(path):
        keep = np.ones(n, bool)
        keep[path] = False
        comp = _components(n, pairs, keep)
        seeds = {comp[i] for i in z_regions if keep[i]}
        return not any(keep[i] and comp[i] in seeds for i in at_z)

    def dfs(path, on):
        u = path[-1]
        if u in dst and cuts(path):
            return True
        for v in nb[u]:
            if v not in on and g.regions[v].color == color:
                on.add(v)
                path.append(v)
                if dfs(path, on):
                    return True
                path.pop()
                on.discard(v)
        return False

    return any(dfs([s], {s}) for s in g.regions_of(X, color))


@pytest.mark.parametrize("N,n", [(4, 12), (5, 8)])
def test_separation_matches_path_search(params, N, n):
    dom = build_triangle_domain(N)
    arr = periodic_floral_arrangement(dom, 3)
    topo, colors, states = _samples(dom, arr, params, n, 100 + N)
    arcs = _triangle_arcs(dom)
    specs = [separation_spec(v, arcs, col) for v in dom.interior_vertices() for col in (B, Y)]
    ev = evaluate_batch(topo, compile_events(topo, specs), colors, states)
    seen = set()
    for k in range(n):
        c = topo.to_configuration(colors[k], states[k])
        g = build_region_graph(c)
        for e, sp in enumerate(specs):
            want = brute_separation(c, sp.vertex, sp.color, arcs)
            assert separation_event(c, sp.vertex, sp.color, arcs, g) == want
            assert bool(ev[k, e]) == want
            seen.add(want)
    assert seen == {True, False}


def test_separation_with_mixed_irises(params):
    # force every iris mixed so the split halves are exercised
    dom = build_triangle_domain(7)
    arr = periodic_floral_arrangement(dom, 3)
    topo, colors, states = _samples(dom, arr, params, 30, 5)
    states[:] = np.random.default_rng(0).integers(2, 5, size=states.shape)
    # mixed irises are outside the support under triggers; the events themselves do not care
    arcs = _triangle_arcs(dom)
    specs = [separation_spec(v, arcs, col) for v in dom.interior_vertices()[::3] for col in (B, Y)]
    ev = evaluate_batch(topo, compile_events(topo, specs), colors, states)
    for k in range(30):
        c = topo.to_configuration(colors[k], states[k])
        g = build_region_graph(c)
        for e, sp in enumerate(specs):
            assert bool(ev[k, e]) == separation_event(c, sp.vertex, sp.color, arcs, g)


def test_crossing_and_one_arm_match_reference(params):
    dom = build_hexagon_domain(7)
    arr = periodic_floral_arrangement(dom, 3)
    topo, colors, states = _samples(dom, arr, params, 60, 11)
    specs = [
        crossing_event(ring(HexCoord(0, 0), 1), dom.sides["outer"], B),
        crossing_event(ring(HexCoord(0, 0), 2), dom.sides["outer"], Y),
        one_arm_spec(HexCoord(0, 0), 6, 0, B),
        one_arm_spec(HexCoord(0, 0), 5, 2, Y),
    ]
    ev = evaluate_batch(topo, compile_events(topo, specs), colors, states)
    for k in range(60):
        c = topo.to_configuration(colors[k], states[k])
        g = build_region_graph(c)
        assert ev[k, 0] == has_crossing(c, specs[0].sets[0], specs[0].sets[1], B, g)
        assert ev[k, 1] == has_crossing(c, specs[1].sets[0], specs[1].sets[1], Y, g)
        assert ev[k, 2] == one_arm_event(c, HexCoord(0, 0), 6, 0, B, g)
        assert ev[k, 3] == one_arm_event(c, HexCoord(0, 0), 5, 2, Y, g)


def test_ring_duality(params):
    """A blue circuit exists exactly when no yellow crossing joins the two rims."""
    dom = build_annulus_domain(1, 5)
    arr = periodic_floral_arrangement(dom, 3, origin=HexCoord(0, 3))
    topo, colors, states = _samples(dom, arr, params, 80, 3)
    inner, outer = dom.sides["inner"], dom.sides["outer"]
    specs = [ring_spec(inner, outer, B), ring_spec(inner, outer, Y)]
    ev = evaluate_batch(topo, compile_events(topo, specs), colors, states)
    hits = set()
    for k in range(80):
        c = topo.to_configuration(colors[k], states[k])
        g = build_region_graph(c)
        for e, col in enumerate((B, Y)):
            direct = ring_event(c, inner, outer, col, g)
            assert direct == (not has_crossing(c, inner, outer, col.opposite, g))
            assert bool(ev[k, e]) == direct
            hits.add(direct)
    assert hits == {True, False}


def test_kernel_enumeration_matches_reference(params):
    dom, arr = flower_domain()
    petals = next(iter(arr.irises)).neighbors()
    iris = next(iter(arr.irises))
    from floralperc.lattice import hex_vertex

    z = hex_vertex(iris, 0)
    arcs = ((petals[0],), (petals[2],), (petals[4],))
    specs = [
        crossing_event([petals[0]], [petals[3]], B),
        crossing_event([petals[1]], [petals[3]], Y),
        separation_spec(z, arcs, B),
        separation_spec(z, arcs, Y),
    ]
    want = [Fraction(0)] * 4
    for c, w in enumerate_configurations(dom, arr, params):
        g = build_region_graph(c)
        flags = [
            has_crossing(c, [petals[0]], [petals[3]], B, g),
            has_crossing(c, [petals[1]], [petals[3]], Y, g),
            separation_event(c, z, B, arcs, g),
            separation_event(c, z, Y, arcs, g),
        ]
        for e, f in enumerate(flags):
            if f:
                want[e] += w
    topo = Topology.build(dom, arr)
    assert exact_probs(topo, specs, params) == want


def test_alpha_iris_splits_top_blue():
    dom, arr = flower_domain()
    iris = next(iter(arr.irises))
    states = {h: HexState.PURE_YELLOW for h in dom.hexes}
    states[iris] = HexState.ALPHA
    petals = iris.neighbors()
    for k in (1, 2):  # the two upper petals
        states[petals[k]] = HexState.PURE_BLUE
    c = Configuration(dom, arr, states)
    g = build_region_graph(c)
    assert len(g.by_home[iris]) == 2
    assert has_crossing(c, [petals[1]], [petals[2]], B, g)
    # the blue half borders edges 0..3, so it joins blue petal 2
    lab = clusters(g, B)
    blue_half = g.by_home[iris][0]
    assert lab[blue_half] == lab[g.by_home[petals[1]][0]]
    doc = json.loads(clusters_to_json(g, B))
    assert doc["color"] == "blue"
    assert {r["hex"][0] for r in doc["regions"]} >= {iris.q}


def test_outside_vertex_rejected(params):
    dom = build_triangle_domain(5)
    arr = periodic_floral_arrangement(dom, 3)
    topo, colors, states = _samples(dom, arr, params, 1, 0)
    c = topo.to_configuration(colors[0], states[0])
    from floralperc.lattice import Vertex

    with pytest.raises(ValueError):
        separation_event(c, Vertex(400, 400), B)
    with pytest.raises(ValueError):
        compile_events(topo, [separation_spec(Vertex(400, 400), _triangle_arcs(dom), B)])
    with pytest.raises(ValueError):
        compile_events(topo, [crossing_event([HexCoord(50, 50)], [HexCoord(0, 0)], B)])


def test_rectangle_crossing_duality(params):
    """Left-right blue crossing fails exactly when a yellow top-bottom crossing exists."""
    dom = build_rectangle_domain(8, 7)
    arr = periodic_floral_arrangement(dom, 3, origin=HexCoord(2, 2))
    topo, colors, states = _samples(dom, arr, params, 400, 9)
    s = dom.sides
    specs = [crossing_event(s["left"], s["right"], B), crossing_event(s["bottom"], s["top"], Y)]
    ev = evaluate_batch(topo, compile_events(topo, specs), colors, states)
    assert np.all(ev[:, 0] != ev[:, 1])
