"""Monte Carlo estimation of event probabilities, Cardy fields and contour integrals.

Sampling is split into fixed-size chunks.  Chunk ``i`` draws from its own
generator seeded by child ``i`` of ``SeedSequence(seed)``, and chunk results
are integer counts combined by addition, so totals do not depend on how many
workers run or in which order chunks finish.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cardy import TAU, field_error, h_triple
from .events import EventSpec, compile_events, evaluate_batch, one_arm_spec
from .lattice import (
    Domain,
    FloralArrangement,
    HexCoord,
    Vertex,
    build_hexagon_domain,
    build_rectangle_domain,
    build_triangle_domain,
    hex_vertex,
    periodic_floral_arrangement,
)
from .model import B, Y, Color, ModelParams
from .topology import Topology, pad_sets, sample_batch

CHUNK = 1000


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int
    successes: int

    @classmethod
    def from_counts(cls, successes: int, n: int) -> "Estimate":
        if n < 1:
            raise ValueError("need at least one sample")
        m = successes / n
        return cls(m, math.sqrt(m * (1 - m) / n), n, int(successes))


def default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def _chunks(n_samples: int, seed: int, chunk: int = CHUNK):
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    sizes = [chunk] * (n_samples // chunk)
    if n_samples % chunk:
        sizes.append(n_samples % chunk)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(sizes, seeds))


def _run(fn, jobs, workers):
    workers = workers or default_workers()
    if workers == 1 or len(jobs) == 1:
        return [fn(*j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda j: fn(*j), jobs))


def estimate_events(domain: Domain, arrangement: FloralArrangement, params: ModelParams, events,
                    n_samples: int, seed: int, workers: int | None = 1) -> list[Estimate]:
    events = list(events)
    for ev in events:
        if not isinstance(ev, EventSpec):
            raise ValueError(f"malformed event spec: {ev!r}")
    topo = Topology.build(domain, arrangement)
    ce = compile_events(topo, events)

    def job(size, ss):
        rng = np.random.default_rng(ss)
        colors, states = sample_batch(topo, params, rng, size)
        return evaluate_batch(topo, ce, colors, states).sum(axis=0)

    totals = sum(_run(job, _chunks(n_samples, seed), workers))
    return [Estimate.from_counts(int(k), n_samples) for k in totals]


def estimate_event(domain, arrangement, params, event: EventSpec, n_samples: int, seed: int, workers=1) -> Estimate:
    return estimate_events(domain, arrangement, params, [event], n_samples, seed, workers)[0]


# ----------------------------------------------------------------------------
# contours


@dataclass(frozen=True)
class Contour:
    vertices: tuple  # Vertex, counterclockwise, not repeated at the end

    def __post_init__(self):
        vs = self.vertices
        if len(vs) < 3:
            raise ValueError("contour needs at least three vertices")
        if len(set(vs)) != len(vs):
            raise ValueError("contour must be simple")
        for a, b in zip(vs, vs[1:] + vs[:1]):
            if abs(a.z - b.z) > 0.58 or abs(a.z - b.z) < 0.5:
                raise ValueError("consecutive contour vertices must share a lattice edge")

    def weights(self, N: int) -> np.ndarray:
        """w_k with sum_k f_k w_k equal to the trapezoid contour sum."""
        z = np.array([v.z for v in self.vertices])
        return (np.roll(z, -1) - np.roll(z, 1)) / (2 * N)


def discrete_contour_integral(f, contour: Contour, N: int) -> complex:
    """(1/N) sum_k (f(z_k) + f(z_{k+1}))/2 (z_{k+1} - z_k) around the closed contour."""
    vs = contour.vertices
    get = f if callable(f) else (lambda v: f[v])
    try:
        vals = [complex(get(v)) for v in vs]
    except KeyError as e:
        raise KeyError(f"vertex {tuple(e.args[0])} missing from field") from None
    tot = 0j
    for k in range(len(vs)):
        k1 = (k + 1) % len(vs)
        tot += (vals[k] + vals[k1]) / 2 * (vs[k1].z - vs[k].z)
    return tot / N


def hex_set_contour(hexes) -> Contour:
    """Counterclockwise boundary of a simply connected set of hexagons."""
    hexes = set(hexes)
    nxt = {}
    for h in hexes:
        for k in range(6):
            if h.neighbor(k) not in hexes:
                # edge k runs from corner k-1 to corner k, counterclockwise around h
                a, b = hex_vertex(h, (k - 1) % 6), hex_vertex(h, k)
                if a in nxt:
                    raise ValueError("hexagon set boundary is not a simple loop")
                nxt[a] = b
    start = min(nxt)
    loop = [start]
    v = nxt[start]
    while v != start:
        loop.append(v)
        v = nxt[v]
    if len(loop) != len(nxt):
        raise ValueError("hexagon set boundary is not a single loop")
    return Contour(tuple(loop))


def triangle_contour(N: int, frac: float = 0.5) -> Contour:
    """Boundary of the centred sub-triangle of hexagons with side ``frac * N``."""
    M = max(1, round(frac * N))
    a = round((N - M) / 3)
    hexes = [HexCoord(q, r) for q in range(a, a + M + 1) for r in range(a, a + M + 1 - (q - a))]
    return hex_set_contour(hexes)


def corner_contour(N: int, cut: float = 1 / 3, inset: float = 1 / 15) -> Contour:
    """Boundary of the corner piece {r >= cut*N} of the triangle, inset from its sides.

    Unlike a centred contour it is not invariant under the 120 degree
    rotation, so the rotation symmetry of the fields does not force the
    expected integrals to vanish.
    """
    m = max(1, round(inset * N))
    r0 = max(m, round(cut * N))
    hexes = [HexCoord(q, r) for r in range(r0, N) for q in range(m, N - m - r + 1)]
    if not hexes:
        raise ValueError("degenerate contour")
    return hex_set_contour(hexes)


CONTOURS = {"corner": corner_contour, "centre": triangle_contour}


def contour_self_tests(contour, N: int) -> list[tuple[str, complex, complex]]:
    """(name, value, exact) for fields whose discrete integrals are known exactly."""
    zs = {v: v.z / N for v in contour.vertices}
    area = enclosed_area(np.array([zs[v] for v in contour.vertices]))

    def hc_minus(v):
        h = h_triple(zs[v].real, zs[v].imag)
        return h[2] - TAU**2 * h[0]

    return [
        ("self_test_constant", discrete_contour_integral(lambda v: 1.0, contour, N), 0j),
        ("self_test_z", discrete_contour_integral(lambda v: zs[v], contour, N), 0j),
        ("self_test_conj_z", discrete_contour_integral(lambda v: zs[v].conjugate(), contour, N), 2j * area),
        ("self_test_linear_triple", discrete_contour_integral(hc_minus, contour, N), 0j),
    ]


def enclosed_area(z: np.ndarray) -> float:
    return 0.5 * float(np.sum(z.real * np.roll(z.imag, -1) - np.roll(z.real, -1) * z.imag))


# ----------------------------------------------------------------------------
# Cardy fields


@dataclass
class FieldEstimate:
    """Shared-sample u, v, w fields in both colours.

    ``counts[color, e, i]`` counts samples with vertex i separated; e indexes
    (u, v, w).  ``integrals[b, color, e, c]`` holds per-sample contour sums.
    """

    N: int
    vertices: list
    counts: np.ndarray
    n: int
    contours: list = field(default_factory=list)
    integrals: np.ndarray | None = None

    @property
    def z(self) -> np.ndarray:
        return np.array([v.z for v in self.vertices]) / self.N

    def estimate(self, which: str, color=None) -> tuple[np.ndarray, np.ndarray]:
        """(mean, stderr) arrays; ``color`` None gives the colour-neutral average."""
        e = "uvw".index(which)
        if color is None:
            k = self.counts[:, e, :].sum(axis=0)
            m = k / (2 * self.n)
            # both colours come from the same samples; bound by the worse of the two
            mb = self.counts[1, e] / self.n
            my = self.counts[0, e] / self.n
            se = np.sqrt(np.maximum(mb * (1 - mb), my * (1 - my)) / self.n)
            return m, se
        k = self.counts[int(Color(color)), e, :]
        m = k / self.n
        return m, np.sqrt(m * (1 - m) / self.n)

    def point(self, which: str, i: int, color=B) -> Estimate:
        return Estimate.from_counts(int(self.counts[int(Color(color)), "uvw".index(which), i]), self.n)

    def contour_value(self, c: int, first: str, second: str):
        """Mean and stderr (real, imag, modulus) of the integral of first - tau^2 second, colour neutral."""
        e1, e2 = "uvw".index(first), "uvw".index(second)
        I = self.integrals[:, :, e1, c].mean(axis=1) - TAU**2 * self.integrals[:, :, e2, c].mean(axis=1)
        return complex_stats(I)


def complex_stats(samples: np.ndarray):
    n = len(samples)
    m = samples.mean()
    if n < 2:
        return m, 0.0, 0.0, 0.0
    cov = np.cov(np.vstack([samples.real, samples.imag])) / n
    se_re, se_im = math.sqrt(cov[0, 0]), math.sqrt(cov[1, 1])
    r = abs(m)
    if r > 0:
        u = np.array([m.real, m.imag]) / r
        se_abs = math.sqrt(max(u @ cov @ u, 0.0))
    else:
        se_abs = math.hypot(se_re, se_im)
    return m, se_re, se_im, se_abs


def estimate_cardy_field(domain: Domain, arrangement: FloralArrangement, params: ModelParams, vertices=None,
                         n_samples: int = 1000, seed: int = 0, contours=(), workers: int | None = 1) -> FieldEstimate:
    if domain.kind != "triangle":
        raise ValueError("Cardy fields need a triangle domain")
    topo = Topology.build(domain, arrangement)
    vertices = list(vertices) if vertices is not None else domain.interior_vertices()
    contours = list(contours)
    allv = list(vertices)
    pos = {v: i for i, v in enumerate(allv)}
    for c in contours:
        for v in c.vertices:
            if v not in pos:
                pos[v] = len(allv)
                allv.append(v)
    vh, vs = topo.vertex_arrays(allv)
    if (vh < 0).any():
        raise ValueError("grid vertices must be interior")
    arcs = pad_sets([topo.idx(domain.boundaryA), topo.idx(domain.boundaryB), topo.idx(domain.boundaryC)])
    cv = np.array([pos[v] for c in contours for v in c.vertices], np.int64)
    cw = np.concatenate([c.weights(domain.N) for c in contours]) if contours else np.zeros(0, complex)
    cid = np.array([i for i, c in enumerate(contours) for _ in c.vertices], np.int64)
    nc = max(1, len(contours))

    def job(size, ss):
        rng = np.random.default_rng(ss)
        colors, states = sample_batch(topo, params, rng, size)
        counts = np.zeros((2, 3, len(allv)), np.int64)
        integ = np.zeros((size, 2, 3, nc), np.complex128)
        kernels.cardy_batch(colors, states, arcs, vh, vs, *topo.kernel_args(), cv, cw, cid, counts, integ)
        return counts, integ

    res = _run(job, _chunks(n_samples, seed), workers)
    counts = sum(r[0] for r in res)
    integ = np.concatenate([r[1] for r in res])
    V = len(vertices)
    return FieldEstimate(domain.N, vertices, counts[:, :, :V], n_samples, contours, integ if contours else None)


def coarse_grid(N: int, N0: int = 15) -> list[Vertex]:
    """Vertices of the mesh-N triangle nearest to the interior vertices of the mesh-N0 triangle.

    Gives the same unit-scale comparison points for every N.
    """
    dom0 = build_triangle_domain(N0)
    dom = build_triangle_domain(N)
    verts = dom.interior_vertices()
    z = np.array([v.z for v in verts]) / N
    out = []
    for v0 in dom0.interior_vertices():
        i = int(np.argmin(np.abs(z - v0.z / N0)))
        out.append(verts[i])
    return out


@dataclass
class CardyRow:
    N: int
    n: int
    max_err: dict
    l2_err: dict
    max_stderr: float
    sum_dev: float
    n_points: int


def cardy_study(N_list, params: ModelParams, n_samples: int, seed: int, period: int = 3, workers=1,
                grid: str = "coarse", contour: str = "corner"):
    """Field errors per N on a common unit-scale grid; returns (rows, fields)."""
    rows, fields = [], {}
    N0 = min(N_list)
    for k, N in enumerate(N_list):
        dom = build_triangle_domain(N)
        arr = periodic_floral_arrangement(dom, period)
        verts = coarse_grid(N, N0) if grid == "coarse" else dom.interior_vertices()
        contours = [CONTOURS[contour](N)]
        fe = estimate_cardy_field(dom, arr, params, verts, n_samples, seed + k, contours, workers)
        fields[N] = fe
        rows.append(summarize_field(fe))
    return rows, fields


def summarize_field(fe: FieldEstimate) -> CardyRow:
    z = fe.z
    max_err, l2 = {}, {}
    worst_se = 0.0
    for which, side in (("u", "C"), ("v", "A"), ("w", "B")):
        m, se = fe.estimate(which)
        err = field_error(z, m, side, se, fe.N)
        max_err[which] = err.max_abs
        l2[which] = err.l2
        worst_se = max(worst_se, err.max_stderr)
    tot = sum(fe.estimate(w)[0] for w in "uvw")
    keep = _interior_mask(z, fe.N)
    dev = float(np.max(np.abs(tot[keep] - 1))) if keep.any() else float("nan")
    return CardyRow(fe.N, fe.n, max_err, l2, worst_se, dev, int(keep.sum()))


def _interior_mask(z, N, margin=2.0):
    s3 = math.sqrt(3)
    d = np.minimum.reduce([z.imag, (s3 * z.real - z.imag) / 2, (s3 * (1 - z.real) - z.imag) / 2])
    return d >= margin / N - 1e-12


# ----------------------------------------------------------------------------
# studies


def contour_vanishing_study(N_list, params: ModelParams, n_samples, seed: int, period: int = 3,
                            contour: str = "corner", workers=1):
    """|integral of (u - tau^2 v)| and its two rotations per N.

    ``n_samples`` is an int or one count per N.
    """
    rows = []
    counts = [n_samples] * len(N_list) if isinstance(n_samples, int) else list(n_samples)
    for k, (N, n) in enumerate(zip(N_list, counts)):
        dom = build_triangle_domain(N)
        arr = periodic_floral_arrangement(dom, period)
        c = CONTOURS[contour](N)
        fe = estimate_cardy_field(dom, arr, params, [], n, seed + k, [c], workers)
        for a, b in (("u", "v"), ("v", "w"), ("w", "u")):
            m, se_re, se_im, se_abs = fe.contour_value(0, a, b)
            rows.append({"N": N, "pair": f"{a}-tau2{b}", "value": m, "abs": abs(m), "stderr": se_abs,
                         "stderr_re": se_re, "stderr_im": se_im, "n": n, "length": len(c.vertices)})
    return rows


@dataclass
class ArmStudy:
    n_list: list
    m: int
    estimates: list
    slope: float | None
    slope_err: float | None
    censored: list


def arm_decay_study(n_list, m: int, params: ModelParams, n_samples: int, seed: int, period: int = 3,
                    color=B, workers=1) -> ArmStudy:
    n_list = list(n_list)
    if len(n_list) < 2 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n list must be increasing with at least two values")
    ests = []
    for k, n in enumerate(n_list):
        dom = build_hexagon_domain(n + 1)
        arr = periodic_floral_arrangement(dom, period)
        ev = one_arm_spec(HexCoord(0, 0), n, m, color)
        ests.append(estimate_event(dom, arr, params, ev, n_samples, seed + k, workers))
    slope, err, censored = loglog_slope(n_list, ests)
    return ArmStudy(n_list, m, ests, slope, err, censored)


def loglog_slope(xs, ests):
    """Weighted least-squares slope of log(mean) on log(x); zero-count points are censored."""
    keep = [(x, e) for x, e in zip(xs, ests) if e.successes > 0]
    censored = [x for x, e in zip(xs, ests) if e.successes == 0]
    if len(keep) < 2:
        return None, None, censored
    lx = np.log([x for x, _ in keep])
    ly = np.log([e.mean for _, e in keep])
    sig = np.array([max(e.stderr, 1.0 / e.n) / e.mean for _, e in keep])
    if len(keep) == 2:
        slope = (ly[1] - ly[0]) / (lx[1] - lx[0])
        err = math.hypot(sig[0], sig[1]) / (lx[1] - lx[0])
        return float(slope), float(err), censored
    coef, cov = np.polyfit(lx, ly, 1, w=1 / sig, cov="unscaled")
    return float(coef[0]), float(math.sqrt(cov[0, 0])), censored


def rectangle_for(N: int, aspect: float):
    """Brick rectangle of width N hexagons and height about ``aspect * N``."""
    rows = max(2, round(aspect * N * 2 / math.sqrt(3)))
    return build_rectangle_domain(N, rows)


def rsw_study(aspects, N_list, params: ModelParams, n_samples: int, seed: int, period: int = 3,
              colors=(B, Y), workers=1):
    """Easy-way and hard-way crossing estimates; aspect = height / width."""
    from .events import crossing_event

    rows = []
    k = 0
    for aspect in aspects:
        for N in N_list:
            dom = rectangle_for(N, aspect)
            arr = periodic_floral_arrangement(dom, period)
            horiz = (dom.sides["left"], dom.sides["right"])
            vert = (dom.sides["bottom"], dom.sides["top"])
            easy, hard = (horiz, vert) if aspect >= 1 else (vert, horiz)
            specs, keys = [], []
            for c in colors:
                for way, sets in (("easy", easy), ("hard", hard)):
                    specs.append(crossing_event(*sets, c))
                    keys.append((way, Color(c)))
            ests = estimate_events(dom, arr, params, specs, n_samples, seed + k, workers)
            k += 1
            for (way, c), e in zip(keys, ests):
                rows.append({"aspect": aspect, "N": N, "way": way, "color": c.letter, "estimate": e,
                             "rows": len(dom.sides["left"])})
    return rows
