"""Exact single-flower oracle.

Petals are numbered 1..6 counterclockwise from the east, as in the flower
figures.  All probabilities are exact ``Fraction`` values.  Connectivity
inside the flower comes from the region graph of a seven-hexagon domain,
reduced once per iris state to an adjacency table over at most eight nodes
(six petals and up to two iris parts).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .connectivity import build_region_graph
from .lattice import Domain, FloralArrangement, HexCoord
from .model import (
    B,
    Y,
    Color,
    Configuration,
    HexState,
    ModelParams,
    iris_law,
    is_trigger,
    petal_code,
)

IRIS = HexCoord(0, 0)
PETALS = tuple(range(1, 7))
FULL = 0b111111


def flower_domain() -> tuple[Domain, FloralArrangement]:
    hexes = frozenset([IRIS] + IRIS.neighbors())
    dom = Domain(hexes=hexes, N=1, boundaryA=(), boundaryB=(), boundaryC=(), kind="flower")
    return dom, FloralArrangement(frozenset([IRIS]), period=3)


def _bit(p: int) -> int:
    return 1 << (p - 1)


def _mask(ps) -> int:
    m = 0
    for p in ps:
        m |= _bit(p)
    return m


@lru_cache(maxsize=None)
def flower_tables(state: HexState):
    """(petal adjacency masks, iris parts as (colour, petal mask)) read off the region graph."""
    dom, arr = flower_domain()
    states = {h: HexState.PURE_YELLOW for h in dom.hexes}
    states[IRIS] = state
    g = build_region_graph(Configuration(dom, arr, states))
    petal_of = {}
    for k, h in enumerate(IRIS.neighbors()):
        (rid,) = g.by_home[h]
        petal_of[rid] = k + 1
    nbr = [0] * 7
    parts = []
    for rid in g.by_home[IRIS]:
        m = 0
        for pair in g.adjacency:
            if rid in pair:
                (other,) = tuple(pair - {rid})
                m |= _bit(petal_of[other])
        parts.append((g.regions[rid].color, m))
    for pair in g.adjacency:
        i, j = tuple(pair)
        if i in petal_of and j in petal_of:
            nbr[petal_of[i]] |= _bit(petal_of[j])
            nbr[petal_of[j]] |= _bit(petal_of[i])
    return tuple(nbr), tuple(parts)


@lru_cache(maxsize=None)
def components(state: HexState, color: Color, usable: int, iris_parts: int) -> tuple[int, ...]:
    """Petal masks of the ``color`` components formed by the usable petals and iris parts.

    ``usable`` lists petals already known to carry ``color``; ``iris_parts``
    is a bit mask over the iris regions allowed to take part.
    """
    nbr, parts = flower_tables(state)
    groups = []
    for p in PETALS:
        if usable & _bit(p):
            groups.append(_bit(p))
    # petal-petal adjacency
    merged = True
    extra = [m & usable for i, (c, m) in enumerate(parts) if c == color and iris_parts >> i & 1]
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                gi, gj = groups[i], groups[j]
                touch = any((gi & _bit(p)) and (nbr[p] & gj) for p in PETALS)
                touch = touch or any((m & gi) and (m & gj) for m in extra)
                if touch:
                    groups[i] = gi | gj
                    del groups[j]
                    merged = True
                    break
            if merged:
                break
    return tuple(sorted(groups))


def petals_adjacent(p: int, q: int) -> bool:
    return (p - q) % 6 in (1, 5)


def _sets_ok(sets, comps) -> bool:
    return all(any(s & c == s for c in comps) for s in sets)


# ----------------------------------------------------------------------------
# petal sets and diamonds


def normalize_sets(d) -> tuple[frozenset, ...]:
    """Accept a single petal set or a collection of disjoint sets."""
    d = list(d)
    if d and isinstance(d[0], int):
        d = [d]
    sets = tuple(frozenset(s) for s in d)
    seen = set()
    for s in sets:
        if not s:
            raise ValueError("empty petal set")
        if not s <= set(PETALS):
            raise ValueError(f"petals must lie in 1..6: {sorted(s)}")
        if s & seen:
            raise ValueError("petal sets must be disjoint")
        seen |= s
    if not sets:
        raise ValueError("no petal sets")
    return sets


@dataclass(frozen=True)
class Diamond:
    """Conditioning on some petals and optionally on an iris transmission.

    ``iris_pair`` = (i, j): the ``iris_color`` part of the iris connects the
    two petals i and j of the diamond directly.
    """

    petals: tuple = ()  # ((petal, Color), ...)
    iris_pair: tuple | None = None
    iris_color: Color = Y

    @classmethod
    def of(cls, petals: dict, iris_pair=None, iris_color=Y) -> "Diamond":
        items = tuple(sorted((int(k), Color(v)) for k, v in petals.items()))
        return cls(items, tuple(iris_pair) if iris_pair else None, Color(iris_color))

    def __post_init__(self):
        if len(self.petals) >= 6:
            raise ValueError("a diamond fixes a proper subset of the petals")
        if self.iris_pair is not None:
            i, j = self.iris_pair
            colors = dict(self.petals)
            if colors.get(i) != self.iris_color or colors.get(j) != self.iris_color:
                raise ValueError("iris pair must be diamond petals of the iris colour")

    @property
    def colors(self) -> dict:
        return dict(self.petals)

    @property
    def mask(self) -> int:
        return _mask(self.colors)

    def mask_of(self, color) -> int:
        return _mask(p for p, c in self.petals if c == color)

    def iris_allows(self, state: HexState) -> bool:
        if self.iris_pair is None:
            return True
        i, j = self.iris_pair
        if not state.is_mixed:
            return state.pure_color == self.iris_color
        part = state.touches(self.iris_color)
        return (i - 1) in part and (j - 1) in part

    @property
    def uniform_color(self):
        cs = {c for _, c in self.petals}
        return cs.pop() if len(cs) == 1 else None


def extensions(dia: Diamond):
    """Every full petal configuration agreeing with ``dia``."""
    fixed = dia.colors
    free = [p for p in PETALS if p not in fixed]
    for bits in itertools.product((Y, B), repeat=len(free)):
        eta = dict(fixed)
        eta.update(zip(free, bits))
        yield tuple(eta[p] for p in PETALS)


def reverse_outside(eta, dia: Diamond) -> tuple:
    """Colour reverse on the complement of the diamond."""
    fixed = dia.colors
    return tuple(c if p in fixed else c.opposite for p, c in zip(PETALS, eta))


# ----------------------------------------------------------------------------
# conditional transmissions

PLAIN = "plain"
SHARE = "share"
NO_CLOSE = "no-close"
IRIS_ON = "iris-on"
IRIS_OFF = "iris-off"


def _conditioned_law(eta, dia: Diamond, params: ModelParams):
    law = {st: m for st, m in iris_law(eta, params).items() if m and dia.iris_allows(st)}
    tot = sum(law.values())
    if tot == 0:
        return None
    return {st: m / tot for st, m in law.items()}


def _indicator(sets, eta, dia: Diamond, color: Color, state: HexState, variant: str) -> bool:
    colored = _mask(p for p, c in zip(PETALS, eta) if c == color)
    if any(s & ~colored for s in sets):
        return False
    allowed = FULL & ~dia.mask
    nbr, parts = flower_tables(state)
    iris_ok = (1 << len(parts)) - 1
    if variant == SHARE:
        allowed |= dia.mask_of(color)
    elif variant == NO_CLOSE:
        near = dia.mask_of(color)
        bad = dia.mask
        for p in PETALS:
            if near & _bit(p):
                bad |= nbr[p]
        if any(s & bad for s in sets):
            return False
        allowed &= ~bad
        for i, (_, m) in enumerate(parts):
            if m & near:
                iris_ok &= ~(1 << i)
    if dia.iris_pair is not None and color == dia.iris_color and variant == IRIS_OFF:
        iris_ok = 0
    comps = components(state, color, colored & allowed, iris_ok)
    return _sets_ok(sets, comps)


def _mask_sets(d) -> tuple[int, ...]:
    return tuple(_mask(s) for s in normalize_sets(d))


def variant_value(d, dia: Diamond, eta, color, params: ModelParams, variant: str = PLAIN):
    """P(event | eta) for one rule variant, or None when the diamond's iris condition is impossible."""
    sets = _mask_sets(d)
    color = Color(color)
    law = _conditioned_law(eta, dia, params)
    if law is None:
        return None
    return sum((m for st, m in law.items() if _indicator(sets, eta, dia, color, st, variant)), Fraction(0))


def predetermined(d, dia: Diamond, eta, color) -> bool:
    """Sets already joined through usable petals alone (no iris needed)."""
    sets = _mask_sets(d)
    color = Color(color)
    colored = _mask(p for p, c in zip(PETALS, eta) if c == color)
    if any(s & ~colored for s in sets):
        return False
    comps = components(HexState.PURE_YELLOW, color, colored & ~dia.mask, 0)
    return _sets_ok(sets, comps)


def _check_consistent(dia: Diamond, eta):
    if len(eta) != 6:
        raise ValueError("a petal configuration has six entries")
    for p, c in dia.petals:
        if eta[p - 1] != c:
            raise ValueError("petal configuration inconsistent with diamond")


@dataclass(frozen=True)
class Rule:
    action: str  # "none", "share", "no-close", "iris"
    p: Fraction = Fraction(0)


NONE_RULE = Rule("none")


@dataclass
class StarRuleTable:
    sets: tuple
    diamond: Diamond
    params: ModelParams
    entries: dict = field(default_factory=dict)  # petal code -> Rule

    def rule(self, eta) -> Rule:
        return self.entries.get(petal_code(eta), NONE_RULE)

    def actions(self) -> set:
        return {r.action for r in self.entries.values()}


def conditional_transmission_prob(d, dia: Diamond, eta, color, params: ModelParams, rules: StarRuleTable | None = None, tilde=False):
    """P(T^{color(*)}_{D,dia} | eta), starred when ``rules`` is given.

    With ``tilde`` the close-encounter prohibition is never applied.
    """
    eta = tuple(Color(c) for c in eta)
    _check_consistent(dia, eta)
    if predetermined(d, dia, eta, color):
        return Fraction(1)
    if rules is None:
        return variant_value(d, dia, eta, color, params, PLAIN)
    r = rules.rule(eta)
    if r.action == "none" or (tilde and r.action == NO_CLOSE):
        if dia.iris_pair is not None and Color(color) == dia.iris_color:
            return variant_value(d, dia, eta, color, params, IRIS_OFF)
        return variant_value(d, dia, eta, color, params, PLAIN)
    if r.action == "iris":
        on = variant_value(d, dia, eta, color, params, IRIS_ON)
        off = variant_value(d, dia, eta, color, params, IRIS_OFF)
        return r.p * on + (1 - r.p) * off
    plain = variant_value(d, dia, eta, color, params, PLAIN)
    alt = variant_value(d, dia, eta, color, params, r.action)
    return r.p * alt + (1 - r.p) * plain


class BalanceInfeasible(ValueError):
    pass


def _solve_side(d, dia, own, color, target, params):
    """Rule on the ``color`` side (petals ``own``) making its value equal ``target``."""
    if dia.iris_pair is not None and color == dia.iris_color:
        lo = variant_value(d, dia, own, color, params, IRIS_OFF)
        hi = variant_value(d, dia, own, color, params, IRIS_ON)
        if lo == hi:
            return Rule("iris", Fraction(0)) if lo == target else None
        p = (target - lo) / (hi - lo)
        return Rule("iris", p) if 0 <= p <= 1 else None
    v0 = variant_value(d, dia, own, color, params, PLAIN)
    if v0 == target:
        return NONE_RULE
    if not dia.mask_of(color):
        return None
    if v0 < target:
        v1 = variant_value(d, dia, own, color, params, SHARE)
        action = SHARE
    else:
        v1 = variant_value(d, dia, own, color, params, NO_CLOSE)
        action = NO_CLOSE
    if v1 == v0:
        return None
    p = (target - v0) / (v1 - v0)
    return Rule(action, p) if 0 <= p <= 1 else None


def solve_star_rules(d, dia: Diamond, params: ModelParams) -> StarRuleTable:
    """Per-configuration permission laws balancing yellow against blue.

    For every petal configuration eta with the sets yellow, the yellow
    *-transmission given eta must equal the blue one given the reverse of
    eta off the diamond.  One side gets a rule, the other none; the side
    carrying the diamond's colour is tried first.
    """
    sets = normalize_sets(d)
    if _mask(set().union(*sets)) & dia.mask:
        raise ValueError("petal sets must avoid the diamond")
    table = StarRuleTable(sets, dia, params)
    if dia.iris_pair is not None:
        order = (dia.iris_color,)
    elif dia.uniform_color is not None:
        order = (dia.uniform_color, dia.uniform_color.opposite)
    else:
        order = (Y, B)
    for eta in extensions(dia):
        if any(eta[p - 1] != Y for s in sets for p in s):
            continue
        bar = reverse_outside(eta, dia)
        side = {Y: eta, B: bar}
        if predetermined(sets, dia, eta, Y):
            continue
        vals = {}
        for c in (Y, B):
            v = variant_value(sets, dia, side[c], c, params,
                              IRIS_OFF if dia.iris_pair is not None and c == dia.iris_color else PLAIN)
            vals[c] = v
        if vals[Y] is None or vals[B] is None:
            continue
        for c in order:
            rule = _solve_side(sets, dia, side[c], c, vals[c.opposite], params)
            if rule is not None:
                table.entries[petal_code(side[c])] = rule
                break
        else:
            raise BalanceInfeasible(
                f"balance infeasible for sets {[sorted(s) for s in sets]}, diamond {dia.colors}, eta {''.join(c.letter for c in eta)}"
            )
        lhs = conditional_transmission_prob(sets, dia, side[Y], Y, params, table)
        rhs = conditional_transmission_prob(sets, dia, side[B], B, params, table)
        if lhs != rhs:
            raise AssertionError("solved rule does not balance")
    return table


def balance_holds(table: StarRuleTable) -> bool:
    """Eq. check: starred yellow given eta equals starred blue given its reverse, for every eta."""
    for eta in extensions(table.diamond):
        if any(eta[p - 1] != Y for s in table.sets for p in s):
            continue
        bar = reverse_outside(eta, table.diamond)
        if _conditioned_law(eta, table.diamond, table.params) is None or _conditioned_law(bar, table.diamond, table.params) is None:
            continue
        lhs = conditional_transmission_prob(table.sets, table.diamond, eta, Y, table.params, table)
        rhs = conditional_transmission_prob(table.sets, table.diamond, bar, B, table.params, table)
        if lhs != rhs:
            return False
    return True


# ----------------------------------------------------------------------------
# unconditioned transmissions


def transmission_prob(d, color, params: ModelParams) -> Fraction:
    """P(all sets ``color`` and each connected within the flower)."""
    sets = _mask_sets(d)
    color = Color(color)
    total = Fraction(0)
    for code in range(64):
        eta = tuple(Color((code >> k) & 1) for k in range(6))
        colored = _mask(p for p, c in zip(PETALS, eta) if c == color)
        if any(s & ~colored for s in sets):
            continue
        for st, m in iris_law(eta, params).items():
            if m and _sets_ok(sets, components(st, color, colored, 0b11)):
                total += m
    return total / 64


def starred_prob(d, dia: Diamond, color, params: ModelParams, rules: StarRuleTable | None = None, tilde=False) -> Fraction:
    """P(T^{color(*)}_{D,dia}) averaged over the free petals (and the iris condition, if any)."""
    num = Fraction(0)
    den = Fraction(0)
    for eta in extensions(dia):
        law = iris_law(eta, params)
        w = sum((m for st, m in law.items() if dia.iris_allows(st)), Fraction(0))
        if w == 0:
            continue
        den += w
        num += w * conditional_transmission_prob(d, dia, eta, color, params, rules, tilde)
    return num / den


def all_petal_sets():
    """Every collection of disjoint nonempty petal sets (order-free)."""
    out = []
    for r in range(1, 7):
        for sub in itertools.combinations(PETALS, r):
            for part in _set_partitions(list(sub)):
                out.append(tuple(frozenset(b) for b in part))
    return out


def _set_partitions(xs):
    if not xs:
        yield []
        return
    head, rest = xs[0], xs[1:]
    for part in _set_partitions(rest):
        yield [[head]] + part
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1 :]


def all_diamonds(max_size: int = 5):
    """Every petal-only diamond with 1..max_size petals."""
    for r in range(1, max_size + 1):
        for sub in itertools.combinations(PETALS, r):
            for cols in itertools.product((Y, B), repeat=r):
                yield Diamond.of(dict(zip(sub, cols)))


def iris_diamonds():
    """Two same-coloured non-adjacent petals joined through the iris."""
    for i, j in itertools.combinations(PETALS, 2):
        if petals_adjacent(i, j):
            continue
        for c in (Y, B):
            yield Diamond.of({i: c, j: c}, iris_pair=(i, j), iris_color=c)


def sets_avoiding(mask: int):
    return [s for s in all_petal_sets() if not (_mask(set().union(*s)) & mask)]


# ----------------------------------------------------------------------------
# structural checks


def binary_uniqueness(color=B) -> bool:
    """Each non-adjacent petal pair is joined through the iris by exactly one mixed state."""
    color = Color(color)
    for i, j in itertools.combinations(PETALS, 2):
        if petals_adjacent(i, j):
            continue
        eta = tuple(color if p in (i, j) else color.opposite for p in PETALS)
        colored = _mask(p for p, c in zip(PETALS, eta) if c == color)
        hits = [
            st for st in (HexState.ALPHA, HexState.BETA, HexState.GAMMA)
            if _sets_ok((_mask((i, j)),), components(st, color, colored, 0b11))
        ]
        if len(hits) != 1:
            return False
    return True


def micro_duality() -> bool:
    """Disk duality inside one flower.

    For petals i, j of one colour that are not adjacent, the two open arcs
    K1, K2 of petals between them cut the flower boundary in four.  Exactly
    one holds: i and j are joined in their colour, or some petal of K1 is
    joined to some petal of K2 in the other colour.
    """
    for code in range(64):
        eta = tuple(Color((code >> k) & 1) for k in range(6))
        for st in HexState:
            if st.is_mixed and is_trigger(eta):
                continue
            comps = {c: components(st, c, _mask(p for p in PETALS if eta[p - 1] == c), 0b11) for c in (Y, B)}
            for i, j in itertools.combinations(PETALS, 2):
                if petals_adjacent(i, j) or eta[i - 1] != eta[j - 1]:
                    continue
                c = eta[i - 1]
                k1 = _mask(range(i + 1, j))
                k2 = FULL & ~k1 & ~_mask((i, j))
                joined = _sets_ok((_mask((i, j)),), comps[c])
                crossed = any(m & k1 and m & k2 for m in comps[c.opposite])
                if joined == crossed:
                    return False
    return True


# ----------------------------------------------------------------------------
# closed-form scenarios, computed by raw enumeration


def next_nearest_ports_value(params: ModelParams) -> Fraction:
    """P(T^B_{1,3} | petals 1, 3 blue, petal 2 yellow), free petals 4..6 averaged."""
    dia = Diamond.of({1: B, 3: B, 2: Y})
    vals = [_raw_uncond((1, 3), eta, B, params) for eta in extensions(dia)]
    return sum(vals, Fraction(0)) / len(vals)


def opposite_ports_value(params: ModelParams) -> Fraction:
    """P(T^B_{1,4} | petals 1, 4 blue), free petals averaged."""
    dia = Diamond.of({1: B, 4: B})
    vals = [_raw_uncond((1, 4), eta, B, params) for eta in extensions(dia)]
    return sum(vals, Fraction(0)) / len(vals)


def _raw_uncond(d, eta, color, params, terminals=()):
    sets = _mask_sets(d)
    color = Color(color)
    colored = _mask(p for p, c in zip(PETALS, eta) if c == color) | _mask(terminals)
    return sum(
        (m for st, m in iris_law(eta, params).items() if m and _sets_ok(sets, components(st, color, colored, 0b11))),
        Fraction(0),
    )


def fkg_counterexample(params: ModelParams) -> tuple[Fraction, Fraction]:
    """(conditioned, unconditioned) probabilities of the S45 <-> S1 connection with petal 6 yellow.

    The connection joins the hexagon sets {4, 5} and {1} by a blue path; the
    end sets act as terminals, so their own colours only enter through the
    iris law.  ``conditioned`` further requires petals 1, 4, 5 blue.
    """
    d = ((1, 4, 5),)
    uncond = []
    cond = []
    for eta in extensions(Diamond.of({6: Y})):
        v = _raw_uncond(d, eta, B, params, terminals=(1, 4, 5))
        uncond.append(v)
        if eta[0] == B and eta[3] == B and eta[4] == B:
            cond.append(v)
    return sum(cond, Fraction(0)) / len(cond), sum(uncond, Fraction(0)) / len(uncond)


def star_rule_cases():
    """Every (d, dia) pair with the sets avoiding the diamond."""
    for dia in itertools.chain(all_diamonds(), iris_diamonds()):
        for d in sets_avoiding(dia.mask):
            yield d, dia


@dataclass
class StarSweep:
    cases: int = 0
    infeasible: list = field(default_factory=list)
    unbalanced: list = field(default_factory=list)
    actions: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.infeasible and not self.unbalanced


def star_rule_sweep(params: ModelParams, check_balance: bool = True) -> StarSweep:
    out = StarSweep()
    for d, dia in star_rule_cases():
        out.cases += 1
        try:
            table = solve_star_rules(d, dia, params)
        except BalanceInfeasible as e:
            out.infeasible.append(str(e))
            continue
        for r in table.entries.values():
            out.actions[r.action] = out.actions.get(r.action, 0) + 1
        if check_balance and not balance_holds(table):
            out.unbalanced.append((d, dia))
    return out


def verify_full_flower_better(d, dia: Diamond, params: ModelParams, color=B):
    """(holds, lhs, rhs) for mu*(T~^{*}_{D,dia}) <= mu(T_D)."""
    table = solve_star_rules(d, dia, params)
    lhs = starred_prob(d, dia, color, params, table, tilde=True)
    rhs = transmission_prob(d, color, params)
    return lhs <= rhs, lhs, rhs


def full_flower_cases():
    """(d, dia, color) triples covered by the full-flower inequality.

    An iris diamond joined in one colour is only ever paired with
    transmissions of that same colour.
    """
    for dia in itertools.chain(all_diamonds(), iris_diamonds()):
        for d in sets_avoiding(dia.mask):
            for color in (B, Y):
                if dia.iris_pair is not None and color != dia.iris_color:
                    continue
                yield d, dia, color


def full_flower_sweep(params: ModelParams):
    """(n_cases, violations) over every case of :func:`full_flower_cases`."""
    tables = {}
    n, bad = 0, []
    for d, dia, color in full_flower_cases():
        key = (d, dia)
        if key not in tables:
            tables[key] = solve_star_rules(d, dia, params)
        lhs = starred_prob(d, dia, color, params, tables[key], tilde=True)
        rhs = transmission_prob(d, color, params)
        n += 1
        if lhs > rhs:
            bad.append((d, dia, color, lhs, rhs))
    return n, bad


def verify_path_fkg_small(domain, arrangement, pairs, params: ModelParams):
    """Exact check of mu(T_J and T_L) >= mu(T_J) mu(T_L) over all nonempty J, L.

    ``pairs`` is a list of (A, B) hexagon sets; T_i is the event that A_i and
    B_i are blue and joined by a blue path.  Returns (ok, worst slack).
    """
    from .events import exact_mask_probs, path_spec
    from .topology import Topology

    if params.a * params.a < 2 * params.s * params.s:
        raise ValueError("requires a^2 >= 2 s^2")
    topo = Topology.build(domain, arrangement)
    specs = [path_spec(a, b, B) for a, b in pairs]
    joint = exact_mask_probs(topo, specs, params)
    n = len(specs)

    def prob(mask):
        return sum((p for m, p in joint.items() if m & mask == mask), Fraction(0))

    worst = None
    for J in range(1, 1 << n):
        for L in range(1, 1 << n):
            slack = prob(J | L) - prob(J) * prob(L)
            worst = slack if worst is None else min(worst, slack)
    return worst >= 0, worst
