"""Event specifications shared by exact enumeration and Monte Carlo.

An event is one of

* ``crossing``   -- a ``color`` cluster meets both ``sets[0]`` and ``sets[1]``;
* ``separation`` -- a self-avoiding ``color`` path from ``sets[0]`` to
  ``sets[1]`` separates ``vertex`` from ``sets[2]``;
* ``ring``       -- a ``color`` circuit separates ``sets[0]`` from ``sets[1]``,
  evaluated as the failure of the opposite-colour crossing;
* ``one-arm``    -- a ``color`` connection between two hexagon rings;
* ``path``       -- both sets entirely ``color`` and joined by a ``color`` cluster.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .lattice import HexCoord, Vertex, ring
from .model import B, TRIGGER_TABLE, Color, ModelParams
from .topology import Topology, node_sets

KINDS = ("crossing", "separation", "ring", "one-arm", "path")


@dataclass(frozen=True)
class EventSpec:
    kind: str
    color: Color = B
    sets: tuple = ()
    vertex: Vertex | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        need = {"crossing": 2, "separation": 3, "ring": 2, "one-arm": 2, "path": 2}[self.kind]
        if len(self.sets) != need:
            raise ValueError(f"{self.kind} event needs {need} hexagon sets, got {len(self.sets)}")
        if self.kind == "separation" and self.vertex is None:
            raise ValueError("separation event needs a vertex")
        object.__setattr__(self, "color", Color(self.color))

    @property
    def label(self) -> str:
        return self.name or f"{self.kind}-{self.color.letter}"


def crossing_event(src, dst, color=B, name="") -> EventSpec:
    return EventSpec("crossing", color, (tuple(src), tuple(dst)), name=name)


def separation_spec(z: Vertex, arcs, color=B, name="") -> EventSpec:
    return EventSpec("separation", color, tuple(tuple(a) for a in arcs), z, name=name)


def ring_spec(inner, outer, color=B, name="") -> EventSpec:
    return EventSpec("ring", color, (tuple(inner), tuple(outer)), name=name)


def one_arm_spec(center: HexCoord, n: int, m: int, color=B, name="") -> EventSpec:
    if m > n:
        raise ValueError("need m <= n")
    return EventSpec("one-arm", color, (tuple(ring(center, m)), tuple(ring(center, n))), name=name)


def path_spec(src, dst, color=B, name="") -> EventSpec:
    return EventSpec("path", color, (tuple(src), tuple(dst)), name=name)


@dataclass
class CompiledEvents:
    kind: np.ndarray
    color: np.ndarray
    sets: np.ndarray
    vh: np.ndarray
    vs: np.ndarray
    negate: np.ndarray
    specs: list = field(default_factory=list)


def compile_events(topo: Topology, specs) -> CompiledEvents:
    specs = list(specs)
    if not specs:
        raise ValueError("no events given")
    kind, color, vh, vs, negate, sets = [], [], [], [], [], []
    for sp in specs:
        for part in sp.sets:
            missing = [h for h in part if h not in topo.index]
            if missing:
                raise ValueError(f"{sp.label}: hexagon {tuple(missing[0])} outside domain")
        idx = [node_sets(topo, part) for part in sp.sets]
        row_vh = np.full(3, -1, np.int64)
        row_vs = np.zeros(3, np.int64)
        if sp.kind == "separation":
            a, b = topo.vertex_arrays([sp.vertex])
            if (a < 0).all():
                raise ValueError(f"vertex {tuple(sp.vertex)} outside domain")
            row_vh, row_vs = a[0], b[0]
            kind.append(kernels.SEPARATION)
            color.append(int(sp.color))
        elif sp.kind == "ring":
            kind.append(kernels.CROSSING)
            color.append(int(sp.color.opposite))
        elif sp.kind == "path":
            kind.append(kernels.PATH)
            color.append(int(sp.color))
        else:
            kind.append(kernels.CROSSING)
            color.append(int(sp.color))
        negate.append(sp.kind == "ring")
        sets.append(idx + [np.zeros(0, np.int64)] * (3 - len(idx)))
        vh.append(row_vh)
        vs.append(row_vs)
    width = max(1, max(len(s) for row in sets for s in row))
    arr = np.full((len(specs), 3, width), -1, np.int64)
    for e, row in enumerate(sets):
        for t, s in enumerate(row):
            arr[e, t, : len(s)] = s
    return CompiledEvents(
        np.array(kind, np.int64),
        np.array(color, np.int64),
        arr,
        np.array(vh, np.int64),
        np.array(vs, np.int64),
        np.array(negate, bool),
        specs,
    )


def evaluate_batch(topo: Topology, ce: CompiledEvents, colors, states) -> np.ndarray:
    """(n, E) booleans: which events occur in each sampled configuration."""
    out = np.zeros((colors.shape[0], len(ce.kind)), dtype=np.bool_)
    kernels.eval_events_batch(colors, states, ce.kind, ce.color, ce.sets, ce.vh, ce.vs, *topo.kernel_args(), out)
    return out ^ ce.negate[None, :]


ENUM_CAP = 22


def exact_counts(topo: Topology, ce: CompiledEvents, cap: int = ENUM_CAP) -> np.ndarray:
    """Raw counts[event mask, iris class code] over the full support."""
    if len(topo.plain) > cap or topo.K > 2:
        raise ValueError("enumeration too large")
    E = len(ce.kind)
    if E > 12:
        raise ValueError("at most 12 events per enumeration")
    counts = np.zeros((1 << E, 3 ** topo.K), np.int64)
    kernels.enumerate_counts(
        topo.H, topo.plain, ce.kind, ce.color, ce.sets, ce.vh, ce.vs, *topo.kernel_args(), TRIGGER_TABLE, counts
    )
    # apply negation in mask space
    flip = sum(1 << e for e in range(E) if ce.negate[e])
    if flip:
        counts = counts[np.arange(1 << E) ^ flip]
    return counts


def class_weights(K: int, params: ModelParams) -> list[Fraction]:
    base = (Fraction(1, 2), params.a, params.s)
    out = []
    for code in range(3**K):
        w = Fraction(1)
        for _ in range(K):
            w *= base[code % 3]
            code //= 3
        out.append(w)
    return out


def exact_mask_probs(topo: Topology, specs, params: ModelParams, cap: int = ENUM_CAP) -> dict[int, Fraction]:
    """Exact probability of every joint outcome (bit e = event e occurred)."""
    ce = compile_events(topo, specs)
    counts = exact_counts(topo, ce, cap)
    w = class_weights(topo.K, params)
    scale = Fraction(1, 2 ** len(topo.plain))
    out = {}
    for mask in range(counts.shape[0]):
        tot = sum(int(counts[mask, c]) * w[c] for c in range(counts.shape[1]) if counts[mask, c])
        if tot:
            out[mask] = tot * scale
    return out


def exact_probs(topo: Topology, specs, params: ModelParams, cap: int = ENUM_CAP) -> list[Fraction]:
    """Exact marginal probability of each event."""
    specs = list(specs)
    joint = exact_mask_probs(topo, specs, params, cap)
    return [sum((p for m, p in joint.items() if m >> e & 1), Fraction(0)) for e in range(len(specs))]
