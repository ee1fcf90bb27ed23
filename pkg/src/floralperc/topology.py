"""Flat array view of a floral domain for the compiled kernels.

Node layout: node ``i`` (``0 <= i < H``) is hexagon ``i`` -- for an iris it is
the blue part when mixed, or the whole iris when pure.  Node ``H + j`` is the
yellow part of iris ``j`` when it is mixed and is absent otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Domain, FloralArrangement, HexCoord, Vertex, vertex_hexes
from .model import (
    B,
    TRIGGER_TABLE,
    Color,
    Configuration,
    HexState,
    ModelParams,
    Y,
)


def _state_tables():
    part_color = np.full((5, 2), -1, dtype=np.int8)
    part_touch = np.zeros((5, 2, 6), dtype=np.bool_)
    vert_part = np.zeros((5, 6), dtype=np.int8)
    for st in HexState:
        if st.is_mixed:
            part_color[st] = (int(B), int(Y))
            for p, c in enumerate((B, Y)):
                for k in st.touches(c):
                    part_touch[st, p, k] = True
            for j in range(6):
                vert_part[st, j] = 0 if st.vertex_part(j) == B else 1
        else:
            part_color[st, 0] = int(st)
            part_touch[st, 0, :] = True
    return part_color, part_touch, vert_part


PART_COLOR, PART_TOUCH, VERT_PART = _state_tables()


@dataclass
class Topology:
    domain: Domain
    arrangement: FloralArrangement
    hexes: list
    index: dict
    nb: np.ndarray  # (H, 6) neighbour index or -1
    edges: np.ndarray  # (E, 2) adjacent non-iris pairs
    iris_hex: np.ndarray  # (K,)
    iris_index: np.ndarray  # (H,) iris number or -1
    petals: np.ndarray  # (K, 6)
    plain: np.ndarray  # non-iris hexagon indices

    @property
    def H(self) -> int:
        return len(self.hexes)

    @property
    def K(self) -> int:
        return len(self.iris_hex)

    @classmethod
    def build(cls, domain: Domain, arrangement: FloralArrangement) -> "Topology":
        hexes = domain.hex_list
        index = {h: i for i, h in enumerate(hexes)}
        H = len(hexes)
        nb = np.full((H, 6), -1, dtype=np.int64)
        for i, h in enumerate(hexes):
            for k, n in enumerate(h.neighbors()):
                nb[i, k] = index.get(n, -1)
        irises = sorted(arrangement.irises, key=lambda h: (h.r, h.q))
        iris_hex = np.array([index[h] for h in irises], dtype=np.int64)
        iris_index = np.full(H, -1, dtype=np.int64)
        iris_index[iris_hex] = np.arange(len(irises))
        petals = nb[iris_hex] if len(irises) else np.zeros((0, 6), dtype=np.int64)
        if len(irises) and (petals < 0).any():
            raise ValueError("iris flower leaves the domain")
        edges = []
        for i in range(H):
            if iris_index[i] >= 0:
                continue
            for k in range(3):
                j = nb[i, k]
                if j >= 0 and iris_index[j] < 0:
                    edges.append((i, j))
        edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        plain = np.array([i for i in range(H) if iris_index[i] < 0], dtype=np.int64)
        return cls(domain, arrangement, hexes, index, nb, edges, iris_hex, iris_index, petals, plain)

    def idx(self, hexes) -> np.ndarray:
        return np.array([self.index[h] for h in hexes], dtype=np.int64)

    def vertex_arrays(self, vertices) -> tuple[np.ndarray, np.ndarray]:
        """(V, 3) hexagon indices and corner slots for each vertex (-1 padded)."""
        vh = np.full((len(vertices), 3), -1, dtype=np.int64)
        vs = np.zeros((len(vertices), 3), dtype=np.int64)
        for n, v in enumerate(vertices):
            for t, (h, j) in enumerate(vertex_hexes(v)):
                i = self.index.get(h, -1)
                vh[n, t] = i
                vs[n, t] = j
        return vh, vs

    def kernel_args(self):
        return (self.edges, self.iris_hex, self.iris_index, self.petals, PART_COLOR, PART_TOUCH, VERT_PART)

    def to_configuration(self, colors, states) -> Configuration:
        st = {}
        for i, h in enumerate(self.hexes):
            if self.iris_index[i] < 0:
                st[h] = HexState(int(colors[i]))
        for j, i in enumerate(self.iris_hex):
            st[self.hexes[i]] = HexState(int(states[j]))
        return Configuration(self.domain, self.arrangement, st)

    def from_configuration(self, c: Configuration) -> tuple[np.ndarray, np.ndarray]:
        colors = np.zeros(self.H, dtype=np.uint8)
        states = np.zeros(self.K, dtype=np.uint8)
        for i, h in enumerate(self.hexes):
            s = c.states[h]
            if self.iris_index[i] >= 0:
                states[self.iris_index[i]] = int(s)
            else:
                colors[i] = int(s.pure_color)
        return colors, states


def trigger_mask(topo: Topology, colors: np.ndarray) -> np.ndarray:
    """(n, K) booleans: which irises see a trigger in each sampled colouring."""
    if topo.K == 0:
        return np.zeros((colors.shape[0], 0), dtype=bool)
    code = np.zeros((colors.shape[0], topo.K), dtype=np.int64)
    for k in range(6):
        code |= colors[:, topo.petals[:, k]].astype(np.int64) << k
    return TRIGGER_TABLE[code]


def sample_batch(topo: Topology, params: ModelParams, rng: np.random.Generator, n: int):
    """Draw ``n`` independent configurations.

    Non-iris hexagons are fair coins; each iris is drawn from its law given
    the sampled petals.  Iris entries of ``colors`` are left at 0.
    """
    colors = rng.integers(0, 2, size=(n, topo.H), dtype=np.uint8)
    u = rng.random((n, topo.K))
    if topo.K:
        colors[:, topo.iris_hex] = 0
    trig = trigger_mask(topo, colors)
    cum = np.cumsum(params.state_probs())
    states = np.searchsorted(cum, u, side="right").astype(np.uint8)
    states = np.minimum(states, 4)
    states = np.where(trig, (u >= 0.5).astype(np.uint8), states)
    return colors, states.astype(np.uint8)


def node_sets(topo: Topology, hexes) -> np.ndarray:
    """Hexagon index array for a set given as HexCoords or indices."""
    hexes = list(hexes)
    if hexes and isinstance(hexes[0], HexCoord):
        return topo.idx(hexes)
    return np.asarray(hexes, dtype=np.int64)


def pad_sets(sets, width=None) -> np.ndarray:
    width = width or max([len(s) for s in sets] + [1])
    out = np.full((len(sets), width), -1, dtype=np.int64)
    for i, s in enumerate(sets):
        out[i, : len(s)] = s
    return out


def color_code(c) -> int:
    return int(Color(c))


__all__ = [
    "Topology",
    "sample_batch",
    "trigger_mask",
    "pad_sets",
    "node_sets",
    "Vertex",
]
