"""Hexagonal tilings of lattice domains and periodic floral arrangements.

Hexagons are pointy-topped (two edges parallel to the y-axis).  Axial
coordinates ``(q, r)`` put the centre of a hexagon at
``x = q + r/2, y = r*sqrt(3)/2`` so neighbouring centres are one unit apart.

The six neighbour directions are listed counterclockwise starting from the
east, which is also the petal numbering of a flower: petal ``k`` (1..6) sits
in direction ``DIRECTIONS[k - 1]`` from its iris.

Lattice vertices and edge midpoints are identified by integer keys on a
refined grid ``(X, Y)`` with ``x = X/4`` and ``y = Y/(4*sqrt(3))``.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

SQRT3 = math.sqrt(3.0)

DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

# refined-grid offsets from a hexagon centre (centre itself is (4q+2r, 6r))
# vertex j sits between edge j+1 and edge j+2 (angles 30, 90, ..., 330 degrees)
VERTEX_OFFSETS = ((2, 2), (0, 4), (-2, 2), (-2, -2), (0, -4), (2, -2))
# midpoint of edge k+1 (shared with the neighbour in DIRECTIONS[k])
MIDPOINT_OFFSETS = ((2, 0), (1, 3), (-1, 3), (-2, 0), (-1, -3), (1, -3))


class HexCoord(NamedTuple):
    q: int
    r: int

    def neighbor(self, k: int) -> "HexCoord":
        dq, dr = DIRECTIONS[k]
        return HexCoord(self.q + dq, self.r + dr)

    def neighbors(self) -> list["HexCoord"]:
        return [self.neighbor(k) for k in range(6)]

    @property
    def center(self) -> complex:
        return complex(self.q + 0.5 * self.r, SQRT3 / 2 * self.r)

    def distance(self, other: "HexCoord") -> int:
        dq = self.q - other.q
        dr = self.r - other.r
        return (abs(dq) + abs(dr) + abs(dq + dr)) // 2

    def rotate60(self, about: "HexCoord" = None) -> "HexCoord":
        """Rotate by +60 degrees about ``about`` (default origin)."""
        oq, orr = (about.q, about.r) if about is not None else (0, 0)
        q, r = self.q - oq, self.r - orr
        return HexCoord(-r + oq, q + r + orr)

    def reflect_y(self, axis_x2: int = 0) -> "HexCoord":
        """Reflect through the vertical line x = axis_x2 / 2."""
        # x = q + r/2 -> axis_x2 - x ; r unchanged
        return HexCoord(axis_x2 - self.q - self.r, self.r)


class Vertex(NamedTuple):
    """A point of the refined grid (hexagon corner or edge midpoint)."""

    X: int
    Y: int

    @property
    def z(self) -> complex:
        return complex(self.X / 4.0, self.Y / (4.0 * SQRT3))


def hex_vertex(h: HexCoord, j: int) -> Vertex:
    dx, dy = VERTEX_OFFSETS[j]
    return Vertex(4 * h.q + 2 * h.r + dx, 6 * h.r + dy)


def edge_midpoint(h: HexCoord, k: int) -> Vertex:
    dx, dy = MIDPOINT_OFFSETS[k]
    return Vertex(4 * h.q + 2 * h.r + dx, 6 * h.r + dy)


def vertex_hexes(v: Vertex) -> list[tuple[HexCoord, int]]:
    """The three hexagons meeting at corner ``v`` with the corner's index in each."""
    out = []
    for j, (dx, dy) in enumerate(VERTEX_OFFSETS):
        cx, cy = v.X - dx, v.Y - dy
        if cy % 6:
            continue
        r = cy // 6
        if (cx - 2 * r) % 4:
            continue
        out.append((HexCoord((cx - 2 * r) // 4, r), j))
    return out


@dataclass(frozen=True)
class Domain:
    hexes: frozenset
    N: int
    boundaryA: tuple
    boundaryB: tuple
    boundaryC: tuple
    cornerAB: HexCoord | None = None
    cornerBC: HexCoord | None = None
    cornerCA: HexCoord | None = None
    kind: str = "triangle"
    # named sides for shapes where the three arcs are not the natural parts
    sides: dict = field(default_factory=dict, compare=False)

    @property
    def hex_list(self) -> list[HexCoord]:
        return sorted(self.hexes, key=lambda h: (h.r, h.q))

    def __len__(self) -> int:
        return len(self.hexes)

    def __contains__(self, h) -> bool:
        return h in self.hexes

    def is_boundary(self, h: HexCoord) -> bool:
        return any(n not in self.hexes for n in h.neighbors())

    def boundary(self) -> set[HexCoord]:
        return {h for h in self.hexes if self.is_boundary(h)}

    def interior_vertices(self) -> list[Vertex]:
        """Hexagon corners all three of whose hexagons lie in the domain."""
        seen = set()
        out = []
        for h in self.hex_list:
            for j in range(6):
                v = hex_vertex(h, j)
                if v in seen:
                    continue
                seen.add(v)
                if all(hh in self.hexes for hh, _ in vertex_hexes(v)):
                    out.append(v)
        return out

    def all_vertices(self) -> list[Vertex]:
        seen = {}
        for h in self.hex_list:
            for j in range(6):
                seen.setdefault(hex_vertex(h, j), None)
        return list(seen)

    def to_dict(self) -> dict:
        def enc(hs):
            return [[h.q, h.r] for h in hs]

        return {
            "kind": self.kind,
            "N": self.N,
            "hexes": enc(self.hex_list),
            "boundaryA": enc(self.boundaryA),
            "boundaryB": enc(self.boundaryB),
            "boundaryC": enc(self.boundaryC),
            "corners": {
                name: (None if c is None else [c.q, c.r])
                for name, c in (("AB", self.cornerAB), ("BC", self.cornerBC), ("CA", self.cornerCA))
            },
            "sides": {k: enc(v) for k, v in self.sides.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Domain":
        def dec(xs):
            return tuple(HexCoord(q, r) for q, r in xs)

        corners = {k: (None if v is None else HexCoord(*v)) for k, v in d["corners"].items()}
        return cls(
            hexes=frozenset(dec(d["hexes"])),
            N=d["N"],
            boundaryA=dec(d["boundaryA"]),
            boundaryB=dec(d["boundaryB"]),
            boundaryC=dec(d["boundaryC"]),
            cornerAB=corners["AB"],
            cornerBC=corners["BC"],
            cornerCA=corners["CA"],
            kind=d["kind"],
            sides={k: dec(v) for k, v in d.get("sides", {}).items()},
        )


@dataclass(frozen=True)
class FloralArrangement:
    irises: frozenset
    period: int
    origin: HexCoord = HexCoord(0, 0)

    def __len__(self) -> int:
        return len(self.irises)

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "origin": [self.origin.q, self.origin.r],
            "irises": [[h.q, h.r] for h in sorted(self.irises, key=lambda h: (h.r, h.q))],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FloralArrangement":
        return cls(
            irises=frozenset(HexCoord(q, r) for q, r in d["irises"]),
            period=d["period"],
            origin=HexCoord(*d.get("origin", (0, 0))),
        )


def is_connected(hexes: Iterable[HexCoord]) -> bool:
    hexes = set(hexes)
    if not hexes:
        return True
    start = next(iter(hexes))
    seen = {start}
    todo = deque([start])
    while todo:
        h = todo.popleft()
        for n in h.neighbors():
            if n in hexes and n not in seen:
                seen.add(n)
                todo.append(n)
    return len(seen) == len(hexes)


def is_simply_connected(hexes: Iterable[HexCoord]) -> bool:
    """Connected, and the complement inside a padded bounding box is connected."""
    hexes = set(hexes)
    if not is_connected(hexes):
        return False
    qs = [h.q for h in hexes]
    rs = [h.r for h in hexes]
    box = {
        HexCoord(q, r)
        for q in range(min(qs) - 2, max(qs) + 3)
        for r in range(min(rs) - 2, max(rs) + 3)
    }
    return is_connected(box - hexes)


def build_triangle_domain(N: int) -> Domain:
    """Hexagons whose centres lie in the closed triangle with corners 0, N, N*exp(i*pi/3).

    Arc A is the right side, B the left side, C the bottom.  Each corner
    hexagon goes to the arc preceding it counterclockwise (A, e_AB, B, e_BC,
    C, e_CA): the top corner to A, the origin to B, (N, 0) to C.
    """
    if N < 4:
        raise ValueError("degenerate domain")
    hexes = frozenset(HexCoord(q, r) for r in range(N + 1) for q in range(N + 1 - r))
    arcA = tuple(HexCoord(q, N - q) for q in range(N - 1, -1, -1))
    arcB = tuple(HexCoord(0, r) for r in range(N - 1, -1, -1))
    arcC = tuple(HexCoord(q, 0) for q in range(1, N + 1))
    return Domain(
        hexes=hexes,
        N=N,
        boundaryA=arcA,
        boundaryB=arcB,
        boundaryC=arcC,
        cornerAB=HexCoord(0, N),
        cornerBC=HexCoord(0, 0),
        cornerCA=HexCoord(N, 0),
        kind="triangle",
    )


def build_parallelogram_domain(width: int, height: int) -> Domain:
    """Axial rhombus ``0 <= q < width, 0 <= r < height``.

    A is the left slanted side, B the right one; C is the bottom row followed
    by the top row (two pieces, exposed separately as ``sides['bottom']`` and
    ``sides['top']``).
    """
    if width < 2 or height < 2:
        raise ValueError("parallelogram needs width, height >= 2")
    hexes = frozenset(HexCoord(q, r) for q in range(width) for r in range(height))
    left = tuple(HexCoord(0, r) for r in range(height - 1, -1, -1))
    right = tuple(HexCoord(width - 1, r) for r in range(height))
    bottom = tuple(HexCoord(q, 0) for q in range(1, width - 1))
    top = tuple(HexCoord(q, height - 1) for q in range(width - 2, 0, -1))
    return Domain(
        hexes=hexes,
        N=max(width, height),
        boundaryA=left,
        boundaryB=right,
        boundaryC=bottom + top,
        cornerAB=None,
        cornerBC=None,
        cornerCA=None,
        kind="parallelogram",
        sides={
            "left": left,
            "right": right,
            "bottom": tuple(HexCoord(q, 0) for q in range(width)),
            "top": tuple(HexCoord(q, height - 1) for q in range(width)),
        },
    )


def build_rectangle_domain(width: int, rows: int) -> Domain:
    """Brick-layout rectangle: ``rows`` rows of ``width`` hexagons.

    Physical size is about ``width`` by ``rows*sqrt(3)/2``; the left and right
    columns have the usual rough edge of a hexagonal lattice.
    """
    if width < 2 or rows < 2:
        raise ValueError("rectangle needs width, rows >= 2")
    hexes = set()
    left, right = [], []
    for r in range(rows):
        q0 = -(r // 2)
        for c in range(width):
            hexes.add(HexCoord(q0 + c, r))
        left.append(HexCoord(q0, r))
        right.append(HexCoord(q0 + width - 1, r))
    bottom = tuple(HexCoord(c, 0) for c in range(width))
    q0t = -((rows - 1) // 2)
    top = tuple(HexCoord(q0t + c, rows - 1) for c in range(width))
    return Domain(
        hexes=frozenset(hexes),
        N=width,
        boundaryA=tuple(reversed(left)),
        boundaryB=tuple(right),
        boundaryC=bottom[1:-1] + top[1:-1][::-1],
        kind="rectangle",
        sides={"left": tuple(left), "right": tuple(right), "bottom": bottom, "top": top},
    )


def build_hexagon_domain(radius: int, center: HexCoord = HexCoord(0, 0)) -> Domain:
    """Hexagonal ball of hex-distance ``radius``; its outer ring is side 'outer'."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    hexes = frozenset(
        HexCoord(center.q + dq, center.r + dr)
        for dq in range(-radius, radius + 1)
        for dr in range(max(-radius, -dq - radius), min(radius, -dq + radius) + 1)
    )
    outer = tuple(ring(center, radius))
    return Domain(
        hexes=hexes,
        N=radius,
        boundaryA=outer,
        boundaryB=(),
        boundaryC=(),
        kind="hexagon",
        sides={"outer": outer, "center": (center,)},
    )


def build_annulus_domain(inner: int, outer: int, center: HexCoord = HexCoord(0, 0)) -> Domain:
    """Hexagons at hex-distance ``inner..outer`` from ``center`` (not simply connected)."""
    if not 1 <= inner < outer:
        raise ValueError("annulus needs 1 <= inner < outer")
    hexes = frozenset(h for d in range(inner, outer + 1) for h in ring(center, d))
    return Domain(
        hexes=hexes,
        N=outer,
        boundaryA=tuple(ring(center, inner)),
        boundaryB=tuple(ring(center, outer)),
        boundaryC=(),
        kind="annulus",
        sides={"inner": tuple(ring(center, inner)), "outer": tuple(ring(center, outer))},
    )


def ring(center: HexCoord, radius: int) -> list[HexCoord]:
    """Hexagons at exactly ``radius`` from ``center``, counterclockwise."""
    if radius == 0:
        return [center]
    h = HexCoord(center.q + DIRECTIONS[4][0] * radius, center.r + DIRECTIONS[4][1] * radius)
    out = []
    for k in range(6):
        for _ in range(radius):
            out.append(h)
            h = h.neighbor(k)
    return out


def sublattice_points(domain: Domain, period: int, origin: HexCoord = HexCoord(0, 0)) -> list[HexCoord]:
    return [
        h
        for h in domain.hex_list
        if (h.q - origin.q) % period == 0 and (h.r - origin.r) % period == 0
    ]


def periodic_floral_arrangement(
    domain: Domain, period: int = 3, origin: HexCoord = HexCoord(0, 0)
) -> FloralArrangement:
    """Irises on the triangular sublattice ``origin + period*Z^2`` inside ``domain``.

    The sublattice is invariant under 60 degree rotations about ``origin`` and
    reflection through the vertical line through ``origin``.  Boundary points
    are dropped; spacing is automatically legal for ``period >= 3``.
    """
    if period < 3:
        raise ValueError("period must be >= 3")
    irises = frozenset(h for h in sublattice_points(domain, period, origin) if not domain.is_boundary(h))
    arr = FloralArrangement(irises=irises, period=period, origin=origin)
    assert not validate_arrangement(domain, arr)
    return arr


def validate_arrangement(domain: Domain, arr: FloralArrangement) -> list[str]:
    """Every rule violation as a message; an empty list means the arrangement is legal."""
    report = []
    irises = sorted(arr.irises, key=lambda h: (h.r, h.q))
    for h in irises:
        if h not in domain:
            report.append(f"iris {tuple(h)} outside domain")
        elif domain.is_boundary(h):
            report.append(f"iris {tuple(h)} is a boundary hexagon")
    for i, h in enumerate(irises):
        for g in irises[i + 1 :]:
            d = h.distance(g)
            if d < 3:
                report.append(f"irises {tuple(h)} and {tuple(g)} at distance {d} (< 3)")
    return report


def flower(iris: HexCoord) -> list[HexCoord]:
    """Petals 1..6 of the flower centred at ``iris``."""
    return iris.neighbors()


def save_json(path, domain: Domain, arr: FloralArrangement | None = None) -> None:
    doc = {"domain": domain.to_dict()}
    if arr is not None:
        doc["arrangement"] = arr.to_dict()
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)


def load_json(path) -> tuple[Domain, FloralArrangement | None]:
    with open(path) as f:
        doc = json.load(f)
    arr = doc.get("arrangement")
    return Domain.from_dict(doc["domain"]), (FloralArrangement.from_dict(arr) if arr else None)
