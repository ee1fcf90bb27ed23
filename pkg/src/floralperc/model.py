"""Hexagon states, model parameters, the trigger rule and the flower measure.

Only the critical line (pure yellow and pure blue equally likely) is
modelled.  Exact weights are ``fractions.Fraction``; floats appear only in
samplers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .lattice import Domain, FloralArrangement, HexCoord

S_MAX = 3 - 2 * math.sqrt(2)


class Color(IntEnum):
    YELLOW = 0
    BLUE = 1

    @property
    def opposite(self) -> "Color":
        return Color(1 - self)

    @property
    def letter(self) -> str:
        return "YB"[self]


Y, B = Color.YELLOW, Color.BLUE


class HexState(IntEnum):
    PURE_YELLOW = 0
    PURE_BLUE = 1
    ALPHA = 2
    BETA = 3
    GAMMA = 4

    @property
    def is_mixed(self) -> bool:
        return self >= 2

    @property
    def pure_color(self) -> Color:
        if self.is_mixed:
            raise ValueError(f"{self.name} is not pure")
        return Color(int(self))

    @property
    def chord(self) -> tuple[int, int]:
        """0-based indices of the two edges whose midpoints the chord joins."""
        if not self.is_mixed:
            raise ValueError(f"{self.name} has no chord")
        k = 2 * (self - 2)
        return (k % 6, (k + 3) % 6)

    def touches(self, color: Color) -> frozenset:
        """0-based edges (petal directions) that the ``color`` part touches.

        An edge cut by the chord is touched by both parts (half an edge each).
        """
        return _TOUCH[int(self)][int(color)]

    def vertex_part(self, j: int) -> Color:
        """Colour of the part containing corner ``j`` (between edges j and j+1)."""
        for c in (B, Y):
            t = self.touches(c)
            if j in t and (j + 1) % 6 in t:
                return c
        raise AssertionError("corner not covered")

    def rotate60(self, times: int = 1) -> "HexState":
        """Image under rotation by ``60*times`` degrees (mixed states only map into the set for even times)."""
        return _rotate_state(self, times)

    def reflect_y(self) -> "HexState":
        return _map_state(self, lambda k: (3 - k) % 6, swap=False)

    def reflect_x_reverse(self) -> "HexState":
        """Reflection through the x-axis followed by colour reversal."""
        return _map_state(self, lambda k: (-k) % 6, swap=True)


def _build_touch():
    table = []
    for st in range(5):
        if st < 2:
            full = frozenset(range(6))
            table.append((full, frozenset()) if st == 0 else (frozenset(), full))
            continue
        k = 2 * (st - 2)
        # blue half holds the two edges counterclockwise after the chord start
        blue_full = {(k + 1) % 6, (k + 2) % 6}
        ends = {k % 6, (k + 3) % 6}
        blue = frozenset(blue_full | ends)
        yellow = frozenset((set(range(6)) - blue_full - ends) | ends)
        table.append((yellow, blue))
    return table


_TOUCH = _build_touch()


def _signature(state: HexState):
    return (state.touches(Y), state.touches(B))


def _map_state(state: HexState, edge_map, swap: bool):
    yel = frozenset(edge_map(k) for k in state.touches(Y))
    blu = frozenset(edge_map(k) for k in state.touches(B))
    if swap:
        yel, blu = blu, yel
    for cand in HexState:
        if _signature(cand) == (yel, blu):
            return cand
    return None


def _rotate_state(state: HexState, times: int):
    return _map_state(state, lambda k: (k + times) % 6, swap=False)


MIXED = (HexState.ALPHA, HexState.BETA, HexState.GAMMA)
PURE = (HexState.PURE_YELLOW, HexState.PURE_BLUE)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    return Fraction(x)


@dataclass(frozen=True)
class ModelParams:
    s: Fraction = Fraction(1, 10)

    def __post_init__(self):
        object.__setattr__(self, "s", as_fraction(self.s))
        if self.s < 0:
            raise ValueError("s must be >= 0")
        a = self.a
        if a * a < 2 * self.s * self.s:
            raise ValueError(f"s={float(self.s):.6g} violates a^2 >= 2 s^2 (s <= 3 - 2*sqrt(2))")

    @property
    def a(self) -> Fraction:
        return (1 - 3 * self.s) / 2

    # yellow / blue aliases used in closed-form tallies
    y = a
    b = a
    e = a

    def state_probs(self) -> np.ndarray:
        """Float probabilities of the five states off-trigger, in HexState order."""
        a, s = float(self.a), float(self.s)
        return np.array([a, a, s, s, s])


PetalConfig = tuple  # six Colors, petal 1 first


def petal_code(p) -> int:
    """Bit k-1 set iff petal k is blue."""
    return sum(int(c) << k for k, c in enumerate(p))


def petals_from_code(code: int) -> tuple:
    return tuple(Color((code >> k) & 1) for k in range(6))


def all_petal_configs() -> list[tuple]:
    return [petals_from_code(c) for c in range(64)]


def is_trigger(p) -> bool:
    """Three yellow petals with exactly one cyclically contiguous yellow pair."""
    if len(p) != 6:
        raise ValueError("a petal configuration has six entries")
    if sum(1 for c in p if c == Y) != 3:
        return False
    pairs = sum(1 for k in range(6) if p[k] == Y and p[(k + 1) % 6] == Y)
    return pairs == 1


TRIGGER_TABLE = np.array([is_trigger(petals_from_code(c)) for c in range(64)], dtype=np.bool_)


def iris_law(p, params: ModelParams) -> dict:
    if is_trigger(p):
        return {HexState.PURE_YELLOW: Fraction(1, 2), HexState.PURE_BLUE: Fraction(1, 2)}
    a, s = params.a, params.s
    return {
        HexState.PURE_YELLOW: a,
        HexState.PURE_BLUE: a,
        HexState.ALPHA: s,
        HexState.BETA: s,
        HexState.GAMMA: s,
    }


class OutsideSupport(ValueError):
    pass


@dataclass
class Configuration:
    domain: Domain
    arrangement: FloralArrangement
    states: dict = field(default_factory=dict)

    def petals(self, iris: HexCoord) -> tuple:
        return tuple(self.states[n].pure_color for n in iris.neighbors())

    def to_dict(self) -> dict:
        return {f"{h.q},{h.r}": self.states[h].name for h in self.domain.hex_list}

    @classmethod
    def from_dict(cls, domain, arrangement, d: Mapping[str, str]) -> "Configuration":
        states = {}
        for key, name in d.items():
            q, r = (int(t) for t in key.split(","))
            states[HexCoord(q, r)] = HexState[name]
        return cls(domain, arrangement, states)


def config_weight(c: Configuration, params: ModelParams) -> Fraction:
    """Exact probability of ``c`` under the flower measure."""
    w = Fraction(1)
    for h in c.domain.hexes:
        st = c.states[h]
        if h in c.arrangement.irises:
            continue
        if st.is_mixed:
            raise OutsideSupport("configuration outside support of mu")
        w *= Fraction(1, 2)
    for iris in c.arrangement.irises:
        law = iris_law(c.petals(iris), params)
        st = c.states[iris]
        if st not in law:
            raise OutsideSupport("configuration outside support of mu")
        w *= law[st]
    return w


def enumerate_configurations(
    domain: Domain, arrangement: FloralArrangement, params: ModelParams, cap: int = 22
) -> Iterator[tuple[Configuration, Fraction]]:
    """Every support configuration exactly once with its exact weight."""
    irises = sorted(arrangement.irises, key=lambda h: (h.r, h.q))
    plain = [h for h in domain.hex_list if h not in arrangement.irises]
    if len(plain) > cap or len(irises) > 2:
        raise ValueError("enumeration too large")
    for bits in itertools.product((Y, B), repeat=len(plain)):
        base = {h: HexState(int(c)) for h, c in zip(plain, bits)}
        petal_sets = [tuple(base[n].pure_color for n in iris.neighbors()) for iris in irises]
        laws = [iris_law(p, params) for p in petal_sets]
        for choice in itertools.product(*[list(law.items()) for law in laws]):
            states = dict(base)
            w = Fraction(1, 2 ** len(plain))
            for iris, (st, m) in zip(irises, choice):
                states[iris] = st
                w *= m
            if w == 0:
                continue
            yield Configuration(domain, arrangement, states), w


def sample_configuration(domain: Domain, arrangement: FloralArrangement, params: ModelParams, seed) -> Configuration:
    """One configuration drawn with the same sampler the Monte Carlo engine uses."""
    from .topology import Topology, sample_batch

    topo = Topology.build(domain, arrangement)
    rng = np.random.default_rng(seed)
    colors, states = sample_batch(topo, params, rng, 1)
    return topo.to_configuration(colors[0], states[0])
