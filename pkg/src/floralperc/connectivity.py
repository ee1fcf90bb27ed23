"""Region graphs of configurations and the connection events built on them.

Every pure hexagon is one region and every mixed hexagon two half regions.
Regions are adjacent when they share a half edge; the chord of a mixed
hexagon is a boundary segment of both halves but never an adjacency.  The
compiled kernels in ``kernels`` implement the same relation on flat arrays;
this module is the readable reference they are tested against.
"""
from __future__ import annotations

import cmath
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .lattice import HexCoord, Vertex, edge_midpoint, hex_vertex, ring, vertex_hexes
from .model import B, Y, Color, Configuration

WHOLE = "whole"


def _seg(p: Vertex, q: Vertex) -> tuple:
    return (p, q) if p <= q else (q, p)


def half_edges(h: HexCoord, k: int) -> tuple[tuple, tuple]:
    """The two half segments of edge ``k``: (start corner, midpoint), (midpoint, end corner)."""
    m = edge_midpoint(h, k)
    return _seg(hex_vertex(h, (k - 1) % 6), m), _seg(m, hex_vertex(h, k))


@dataclass(frozen=True)
class Region:
    home: HexCoord
    part: object  # WHOLE, or 0 (blue half) / 1 (yellow half)
    color: Color
    boundary: tuple  # segments as (Vertex, Vertex)

    @property
    def points(self) -> set:
        return {p for s in self.boundary for p in s}

    @property
    def centroid(self) -> complex:
        pts = self.points
        return sum(p.z for p in pts) / len(pts)


@dataclass
class RegionGraph:
    config: Configuration
    regions: list
    adjacency: set  # frozensets {i, j}
    chords: list = field(default_factory=list)  # (blue half, yellow half) of each mixed hexagon
    by_home: dict = field(default_factory=dict)

    def neighbors(self) -> list[list[int]]:
        nb = [[] for _ in self.regions]
        for pair in self.adjacency:
            i, j = tuple(pair)
            nb[i].append(j)
            nb[j].append(i)
        return nb

    def regions_of(self, hexes, color=None) -> list[int]:
        out = []
        for h in hexes:
            for i in self.by_home.get(h, ()):
                if color is None or self.regions[i].color == color:
                    out.append(i)
        return out

    def regions_at(self, z: Vertex) -> list[int]:
        return [i for h, _ in vertex_hexes(z) for i in self.by_home.get(h, ()) if z in self.regions[i].points]


def build_region_graph(c: Configuration) -> RegionGraph:
    regions = []
    owners = defaultdict(list)
    by_home = {}
    chords = []
    for h in c.domain.hex_list:
        st = c.states[h]
        halves = [(k, t, s) for k in range(6) for t, s in enumerate(half_edges(h, k))]
        if not st.is_mixed:
            parts = [(WHOLE, st.pure_color, [s for _, _, s in halves])]
        else:
            a, b = st.chord
            chord = _seg(edge_midpoint(h, a), edge_midpoint(h, b))
            parts = []
            for part, col in ((0, B), (1, Y)):
                segs = [s for k, t, s in halves if st.vertex_part((k - 1) % 6 if t == 0 else k) == col]
                parts.append((part, col, segs + [chord]))
        ids = []
        for part, col, segs in parts:
            rid = len(regions)
            regions.append(Region(h, part, col, tuple(segs)))
            ids.append(rid)
            for s in segs:
                owners[s].append(rid)
        by_home[h] = tuple(ids)
        if len(ids) == 2:
            chords.append((ids[0], ids[1]))
    adjacency = set()
    for s, rs in owners.items():
        for i in rs:
            for j in rs:
                if i < j and regions[i].home != regions[j].home:
                    adjacency.add(frozenset((i, j)))
    g = RegionGraph(c, regions, adjacency, chords, by_home)
    _check_vertex_condition(g)
    return g


def _check_vertex_condition(g: RegionGraph) -> None:
    hexes = g.config.domain.hexes
    incident = defaultdict(set)
    for i, r in enumerate(g.regions):
        for p in r.points:
            incident[p].add(i)
    for h in g.config.domain.hex_list:
        pts = [hex_vertex(h, j) for j in range(6)]
        st = g.config.states[h]
        if st.is_mixed:
            pts += [edge_midpoint(h, k) for k in st.chord]
        for p in pts:
            full = all(hh in hexes for hh, _ in vertex_hexes(p)) if p in _corners(h) else all(
                n in hexes for n in _midpoint_hexes(h, p)
            )
            if full and len(incident[p]) != 3:
                raise AssertionError(f"vertex {p} meets {len(incident[p])} regions")


def _corners(h):
    return {hex_vertex(h, j) for j in range(6)}


def _midpoint_hexes(h, p):
    for k in range(6):
        if edge_midpoint(h, k) == p:
            return [h, h.neighbor(k)]
    return [h]


def _components(n: int, pairs, keep) -> np.ndarray:
    """Connected-component labels of the kept nodes; dropped nodes get -1."""
    rows, cols = [], []
    for i, j in pairs:
        if keep[i] and keep[j]:
            rows.append(i)
            cols.append(j)
    m = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    _, lab = connected_components(m, directed=False)
    lab = np.asarray(lab)
    lab[~np.asarray(keep)] = -1
    return lab


def clusters(g: RegionGraph, color) -> dict[int, int]:
    """Region id -> cluster label for every region of ``color``.

    Labels are the smallest region id of each cluster.
    """
    keep = np.array([r.color == color for r in g.regions], dtype=bool)
    lab = _components(len(g.regions), (tuple(p) for p in g.adjacency), keep)
    first = {}
    for i in np.flatnonzero(keep):
        first.setdefault(lab[i], int(i))
    return {int(i): first[lab[i]] for i in np.flatnonzero(keep)}


def _touching(g, labels, hexes, color) -> set:
    return {labels[i] for i in g.regions_of(hexes, color)}


def has_crossing(c: Configuration, src, dst, color, g: RegionGraph | None = None) -> bool:
    g = g or build_region_graph(c)
    lab = clusters(g, color)
    return bool(_touching(g, lab, src, color) & _touching(g, lab, dst, color))


def path_backbone(g: RegionGraph, src, dst, color) -> set[int]:
    """Regions of ``color`` lying on some self-avoiding path from ``src`` to ``dst``.

    These are the regions of the biconnected blocks met by the block-cut tree
    path between two auxiliary nodes attached to the source and target sets.
    """
    a, b = ("src",), ("dst",)
    G = nx.Graph()
    G.add_edges_from(tuple(p) for p in g.adjacency
                     if all(g.regions[i].color == color for i in p))
    G.add_edges_from((a, i) for i in g.regions_of(src, color))
    G.add_edges_from((b, i) for i in g.regions_of(dst, color))
    if a not in G or b not in G or not nx.has_path(G, a, b):
        return set()
    tree = nx.Graph()
    blocks = [set(blk) for blk in nx.biconnected_components(G)]
    for k, blk in enumerate(blocks):
        tree.add_edges_from((("block", k), ("node", v)) for v in blk)
    out = set()
    for kind, x in nx.shortest_path(tree, ("node", a), ("node", b)):
        if kind == "block":
            out |= blocks[x]
    return {v for v in out if isinstance(v, (int, np.integer))}


def separation_event(c: Configuration, z: Vertex, color, arcs=None, g: RegionGraph | None = None) -> bool:
    """Whether a self-avoiding ``color`` path from arc X to arc Y separates ``z`` from arc Z.

    ``arcs`` defaults to (A, B, C) of the domain.  The separating set is the
    X-Y backbone; ``z`` is separated when every region at ``z`` is on it, or
    when its complementary component misses Z.
    """
    dom = c.domain
    if not any(h in dom for h, _ in vertex_hexes(z)):
        raise ValueError(f"vertex {tuple(z)} outside domain")
    X, Yarc, Z = arcs if arcs is not None else (dom.boundaryA, dom.boundaryB, dom.boundaryC)
    g = g or build_region_graph(c)
    bb = path_backbone(g, X, Yarc, color)
    keep = np.array([i not in bb for i in range(len(g.regions))], dtype=bool)
    pairs = [tuple(p) for p in g.adjacency] + list(g.chords)
    comp = _components(len(g.regions), pairs, keep)
    seeds = {comp[i] for i in g.regions_of(Z) if keep[i]}
    return not any(keep[i] and comp[i] in seeds for i in g.regions_at(z))


def ring_event(c: Configuration, inner, outer, color, g: RegionGraph | None = None) -> bool:
    """A ``color`` circuit surrounding the hole of an annulus.

    Detected directly: a cycle of same-coloured adjacent regions whose
    accumulated angle about the hole is nonzero.  ``outer`` is accepted for
    symmetry with the crossing form; the circuit test does not need it.
    """
    g = g or build_region_graph(c)
    centre = sum(h.center for h in inner) / len(inner)
    ang = [cmath.phase(r.centroid - centre) for r in g.regions]
    parent = list(range(len(g.regions)))
    pot = [0.0] * len(g.regions)  # angle of node relative to its root

    def find(x):
        acc = 0.0
        path = []
        while parent[x] != x:
            path.append(x)
            acc += pot[x]
            x = parent[x]
        # compress
        for p in path:
            sub = pot[p]
            pot[p] = acc
            acc -= sub
            parent[p] = x
        return x

    for pair in g.adjacency:
        i, j = tuple(pair)
        if g.regions[i].color != color or g.regions[j].color != color:
            continue
        d = math.remainder(ang[j] - ang[i], 2 * math.pi)
        ri, rj = find(i), find(j)
        if ri == rj:
            if abs(pot[i] + d - pot[j]) > math.pi:
                return True
        else:
            parent[rj] = ri
            pot[rj] = pot[i] + d - pot[j]
    return False


def one_arm_event(c: Configuration, center: HexCoord, n: int, m: int, color=B, g=None) -> bool:
    """A ``color`` connection between the hexagon rings of radius ``m`` and ``n``.

    For ``m == n`` the event is that some hexagon of the ring carries ``color``.
    """
    if m > n:
        raise ValueError("need m <= n")
    g = g or build_region_graph(c)
    if m == n:
        return bool(g.regions_of(ring(center, n), color))
    return has_crossing(c, ring(center, m), ring(center, n), color, g)


def clusters_to_json(g: RegionGraph, color) -> str:
    lab = clusters(g, color)
    doc = [
        {"hex": [g.regions[i].home.q, g.regions[i].home.r], "part": g.regions[i].part, "cluster": l}
        for i, l in sorted(lab.items())
    ]
    return json.dumps({"color": Color(color).name.lower(), "regions": doc})
