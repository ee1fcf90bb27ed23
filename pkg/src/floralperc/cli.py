"""Command-line front door.

Every command writes into ``--out``: a CSV report, a JSON manifest holding
the full parameter set and master seed, and (for the Monte Carlo studies)
PNG figures.  Parameters come from ``--config`` JSON with flags taking
precedence.  Exit codes: 0 success, 2 invalid configuration, 3 a check failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .model import B, Y, Color, Configuration, HexState, ModelParams, OutsideSupport, config_weight

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 2, 3
CSV_FIELDS = ("experiment_id", "N", "s", "event", "mean", "stderr", "n")

DEFAULTS = {
    "s": "1/10",
    "period": 3,
    "workers": None,
    "out": ".",
    "id": None,
    "seed": None,
}
COMMAND_DEFAULTS = {
    "oracle-verify": {},
    "cardy": {"n_mesh": [30], "samples": 10_000, "grid": "coarse", "check": False},
    "render": {"n_mesh": [6], "domain": "hexagon", "fill": "sample", "iris_state": None,
               "highlight": None, "scale": 20.0},
    "crossing": {"n_mesh": [20, 40, 80], "samples": 10_000, "aspect": [math.sqrt(3) / 2]},
    "arms": {"n_mesh": [8, 16, 32, 64], "samples": 10_000, "m": 1, "color": "B"},
    "contour": {"n_mesh": [15, 30, 60], "samples": 10_000, "contour": "corner", "self_test": False},
}
NEEDS_SEED = {"cardy", "render", "crossing", "arms", "contour"}


class ConfigError(ValueError):
    pass


def parse_s(value) -> Fraction:
    """Exact rational s; decimal strings are read exactly ("0.1" is 1/10)."""
    try:
        s = Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"s must be a rational number, got {value!r}") from None
    try:
        ModelParams(s)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return s


def _int_list(text: str) -> list[int]:
    return [int(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # every default is None so that config-file values survive unless a flag is given
    common.add_argument("--config", help="JSON file with parameters; flags override it")
    common.add_argument("--s", help="mixed-state weight s as a rational, e.g. 1/10 (0 <= s <= 3-2*sqrt(2))")
    common.add_argument("--n-mesh", dest="n_mesh", type=_int_list, help="comma-separated mesh sizes")
    common.add_argument("--period", type=int, help="iris sublattice period (>= 3)")
    common.add_argument("--samples", type=int, help="Monte Carlo samples per mesh size")
    common.add_argument("--seed", type=int, help="master seed (mandatory for sampling commands)")
    common.add_argument("--workers", type=int, help="worker threads; 1 is the serial debug mode")
    common.add_argument("--out", help="output directory")
    common.add_argument("--id", help="experiment id used in file names and the CSV")

    p = argparse.ArgumentParser(prog="floralperc", description="Flower percolation experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("oracle-verify", parents=[common], help="exact single-flower identities and inequalities")

    c = sub.add_parser("cardy", parents=[common], help="u, v, w fields on the triangle against the harmonic triple")
    c.add_argument("--grid", choices=("coarse", "full"), help="coarse: common unit-scale grid of the smallest N")
    c.add_argument("--check", action="store_const", const=True,
                   help="exit 3 unless the max error and the u+v+w deviation are nonincreasing in N")

    r = sub.add_parser("render", parents=[common], help="SVG of one configuration")
    r.add_argument("--domain", choices=("hexagon", "triangle", "flower"))
    r.add_argument("--fill", choices=("sample", "blue", "yellow"), help="sampled or uniform petals")
    r.add_argument("--iris-state", dest="iris_state", choices=[st.name for st in HexState],
                   help="force every iris into this state")
    r.add_argument("--highlight", help="q,r of a hexagon whose cluster is outlined")
    r.add_argument("--scale", type=float)

    x = sub.add_parser("crossing", parents=[common], help="easy/hard crossings of rectangles")
    x.add_argument("--aspect", type=_float_list, help="height/width ratios (default sqrt(3)/2)")

    a = sub.add_parser("arms", parents=[common], help="one-arm decay; --n-mesh lists the outer radii")
    a.add_argument("--m", type=int, help="inner radius")
    a.add_argument("--color", choices=("B", "Y"))

    k = sub.add_parser("contour", parents=[common], help="contour integrals of u - tau^2 v and rotations")
    k.add_argument("--contour", choices=("corner", "centre"))
    k.add_argument("--self-test", dest="self_test", action="store_const", const=True,
                   help="only run the exact integration self-tests")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as f:
                doc = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, val in doc.items():
            key = key.replace("-", "_")
            if key in ("command", "version", "outputs", "runtime_s"):
                continue
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = val
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        cfg[key] = val
    cfg["command"] = args.command
    return validate(cfg)


def validate(cfg: dict) -> dict:
    cfg["s"] = str(parse_s(cfg["s"]))
    if cfg["seed"] is None and cfg["command"] in NEEDS_SEED:
        raise ConfigError("--seed is mandatory")
    if cfg["seed"] is not None and (not isinstance(cfg["seed"], int) or cfg["seed"] < 0):
        raise ConfigError("seed must be a nonnegative integer")
    if not isinstance(cfg["period"], int) or cfg["period"] < 3:
        raise ConfigError("period must be an integer >= 3")
    if "n_mesh" in cfg:
        ns = cfg["n_mesh"]
        if isinstance(ns, int):
            ns = [ns]
        if not ns or any(not isinstance(n, int) or n < 1 for n in ns):
            raise ConfigError("mesh sizes must be positive integers")
        cfg["n_mesh"] = list(ns)
    if "samples" in cfg and (not isinstance(cfg["samples"], int) or cfg["samples"] < 1):
        raise ConfigError("samples must be a positive integer")
    if cfg["workers"] is not None and cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    if cfg["command"] == "arms":
        ns = cfg["n_mesh"]
        if len(ns) < 2 or any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigError("arms needs an increasing list of at least two radii")
        if not 0 <= cfg["m"] <= ns[0]:
            raise ConfigError("inner radius m must lie in [0, smallest n]")
    if cfg["command"] == "crossing" and any(x <= 0 for x in cfg["aspect"]):
        raise ConfigError("aspect ratios must be positive")
    if cfg["id"] is None:
        cfg["id"] = cfg["command"]
    return cfg


class Report:
    """Collects CSV rows and output paths, then writes them plus the manifest."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.rows: list[dict] = []
        self.files: list[str] = []

    def path(self, suffix: str) -> Path:
        p = self.out / f"{self.cfg['id']}{suffix}"
        self.files.append(p.name)
        return p

    def add(self, N, event, mean, stderr, n):
        self.rows.append({"experiment_id": self.cfg["id"], "N": N, "s": self.cfg["s"], "event": event,
                          "mean": _fmt(mean), "stderr": _fmt(stderr), "n": n})

    def write_csv(self, fields=CSV_FIELDS, rows=None):
        with open(self.path(".csv"), "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            w.writerows(self.rows if rows is None else rows)

    def write_manifest(self, **extra):
        doc = {k: v for k, v in sorted(self.cfg.items())}
        doc["version"] = __version__
        doc.update(extra)
        doc["outputs"] = sorted(set(self.files + [f"{self.cfg['id']}.json"]))
        with open(self.out / f"{self.cfg['id']}.json", "w") as f:
            json.dump(doc, f, indent=1, sort_keys=True)
            f.write("\n")


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


# ----------------------------------------------------------------------------
# commands


def cmd_oracle_verify(cfg: dict) -> int:
    from . import oracle

    s = Fraction(cfg["s"])
    params = ModelParams(s)
    b = params.b
    rows: list[dict] = []

    def check(name, group, value, expected, ok, n=1):
        rows.append({"experiment_id": cfg["id"], "check": name, "group": group, "s": cfg["s"],
                     "value": str(value), "expected": str(expected), "ok": int(bool(ok)), "cases": n})

    sets = oracle.all_petal_sets()
    bad = [d for d in sets if oracle.transmission_prob(d, B, params) != oracle.transmission_prob(d, Y, params)]
    check("transmission_parity", "parity", len(bad), 0, not bad, len(sets))
    for c in (B, Y):
        ok = oracle.binary_uniqueness(c)
        check(f"binary_uniqueness_{c.letter}", "parity", ok, True, ok)
    ok = oracle.micro_duality()
    check("micro_duality", "parity", ok, True, ok)

    sw = oracle.star_rule_sweep(params)
    check("star_rules_feasible", "star-rules", len(sw.infeasible), 0, not sw.infeasible, sw.cases)
    check("star_rules_balance", "star-rules", len(sw.unbalanced), 0, not sw.unbalanced, sw.cases)

    n, viol = oracle.full_flower_sweep(params)
    check("full_flower_better", "full-flower", len(viol), 0, not viol, n)

    gt = oracle.next_nearest_ports_value(params)
    gt_ref = Fraction(1, 8) * (1 + 2 * Fraction(1, 2) + 2 * (b + s) + 3 * (b + 2 * s))
    check("next_nearest_ports", "full-flower", gt, gt_ref, gt == gt_ref)
    op = oracle.opposite_ports_value(params)
    op_ref = Fraction(1, 4) + Fraction(3, 4) * (Fraction(1, 4) + (b + s) / 4 + (b + 2 * s) / 2)
    check("opposite_ports", "full-flower", op, op_ref, op == op_ref)
    cond, uncond = oracle.fkg_counterexample(params)
    a = params.a
    cond_ref = Fraction(1, 4) * (1 + Fraction(1, 2) + 2 * (a + 2 * s))
    uncond_ref = Fraction(1, 32) * (5 * Fraction(1, 2) + 8 + 19 * (a + 2 * s))
    check("fkg_conditioned", "fkg", cond, cond_ref, cond == cond_ref)
    check("fkg_unconditioned", "fkg", uncond, uncond_ref, uncond == uncond_ref)
    check("fkg_strict", "fkg", cond < uncond, s > 0, (cond < uncond) == (s > 0))

    dom, arr = oracle.flower_domain()
    petals = oracle.IRIS.neighbors()
    pairs = [([petals[0]], [petals[3]]), ([petals[1]], [petals[4]])]
    ok, worst = oracle.verify_path_fkg_small(dom, arr, pairs, params)
    check("path_fkg", "fkg", worst, ">= 0", ok)

    rep = Report(cfg)
    fields = ("experiment_id", "check", "group", "s", "value", "expected", "ok", "cases")
    rep.write_csv(fields, rows)
    failed = [r for r in rows if not r["ok"]]
    rep.write_manifest(failed=[f"{r['check']} ({r['group']})" for r in failed])
    for r in failed:
        print(f"FAILED {r['check']} ({r['group']}): value {r['value']}, expected {r['expected']}", file=sys.stderr)
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    return EXIT_FAILED if failed else EXIT_OK


def cmd_cardy(cfg: dict) -> int:
    from .estimator import cardy_study
    from .plotting import plot_cardy_convergence, plot_cardy_field

    params = ModelParams(Fraction(cfg["s"]))
    t0 = time.perf_counter()
    rows, fields = cardy_study(cfg["n_mesh"], params, cfg["samples"], cfg["seed"], cfg["period"],
                               cfg["workers"], grid=cfg["grid"])
    rep = Report(cfg)
    from .cardy import h_triple
    from .plotting import REFERENCE

    for N, fe in fields.items():
        z = fe.z
        ref = h_triple(z.real, z.imag)
        for which in "uvw":
            per = {None: fe.estimate(which), B: fe.estimate(which, B), Y: fe.estimate(which, Y)}
            for i, v in enumerate(fe.vertices):
                tag = f"{v.X},{v.Y}"
                for col, (m, se) in per.items():
                    name = which if col is None else f"{which}_{Color(col).letter}"
                    rep.add(N, f"{name}@{tag}", m[i], se[i], fe.n)
                rep.add(N, f"h_{which}@{tag}", ref[REFERENCE[which]][i], 0.0, 0)
    for row in rows:
        for which in "uvw":
            rep.add(row.N, f"max_err_{which}", row.max_err[which], row.max_stderr, row.n)
        rep.add(row.N, "max_sum_dev", row.sum_dev, 3 * row.max_stderr, row.n)
    rep.write_csv()
    for N, fe in fields.items():
        plot_cardy_field(fe, rep.path(f"_field_u_N{N}.png"), "u")
    if len(rows) > 1:
        plot_cardy_convergence(rows, rep.path("_convergence.png"))
    ok = True
    if cfg["check"]:
        errs = [r.max_err["u"] for r in rows]
        devs = [r.sum_dev for r in rows]
        ok = all(b <= a for a, b in zip(errs, errs[1:])) and all(b <= a for a, b in zip(devs, devs[1:]))
    rep.write_manifest(runtime_s=round(time.perf_counter() - t0, 1))
    for r in rows:
        print(f"N={r.N}: max|u-h|={r.max_err['u']:.4f} max|u+v+w-1|={r.sum_dev:.4f}")
    return EXIT_OK if ok else EXIT_FAILED


def _render_domain(cfg):
    from .lattice import build_hexagon_domain, build_triangle_domain, periodic_floral_arrangement
    from .oracle import flower_domain

    if cfg["domain"] == "flower":
        return flower_domain()
    N = cfg["n_mesh"][0]
    dom = build_hexagon_domain(N) if cfg["domain"] == "hexagon" else build_triangle_domain(N)
    return dom, periodic_floral_arrangement(dom, cfg["period"])


def cmd_render(cfg: dict) -> int:
    from .connectivity import build_region_graph, clusters
    from .lattice import HexCoord
    from .model import sample_configuration
    from .render import MAX_HEXES, save_svg

    dom, arr = _render_domain(cfg)
    if len(dom.hexes) > MAX_HEXES:
        raise ConfigError(f"domain too large to render ({len(dom.hexes)} > {MAX_HEXES} hexagons)")
    params = ModelParams(Fraction(cfg["s"]))
    if cfg["fill"] == "sample":
        c = sample_configuration(dom, arr, params, cfg["seed"])
    else:
        st = HexState.PURE_BLUE if cfg["fill"] == "blue" else HexState.PURE_YELLOW
        c = Configuration(dom, arr, {h: st for h in dom.hexes})
    if cfg["iris_state"]:
        for h in arr.irises:
            c.states[h] = HexState[cfg["iris_state"]]
    try:
        config_weight(c, params)
    except OutsideSupport as e:
        raise ConfigError(str(e)) from None
    highlight = ()
    if cfg["highlight"]:
        q, r = _int_list(cfg["highlight"])
        h0 = HexCoord(q, r)
        if h0 not in dom:
            raise ConfigError(f"hexagon {q},{r} is outside the domain")
        g = build_region_graph(c)
        color = c.states[h0].pure_color if not c.states[h0].is_mixed else B
        lab = clusters(g, color)
        mine = {lab[i] for i in g.regions_of([h0], color)}
        highlight = sorted({g.regions[i].home for i, l in lab.items() if l in mine})
    rep = Report(cfg)
    save_svg(rep.path(".svg"), c, highlight=highlight, scale=cfg["scale"], title=cfg["id"])
    rep.write_manifest(highlighted=len(highlight))
    return EXIT_OK


def cmd_crossing(cfg: dict) -> int:
    from .estimator import rsw_study
    from .plotting import plot_crossing

    params = ModelParams(Fraction(cfg["s"]))
    rows = rsw_study(cfg["aspect"], cfg["n_mesh"], params, cfg["samples"], cfg["seed"], cfg["period"],
                     workers=cfg["workers"])
    rep = Report(cfg)
    for r in rows:
        e = r["estimate"]
        rep.add(r["N"], f"{r['way']}_{r['color']}@aspect={r['aspect']:.6f}", e.mean, e.stderr, e.n)
    rep.write_csv()
    plot_crossing(rows, rep.path(".png"))
    rep.write_manifest()
    return EXIT_OK


def cmd_arms(cfg: dict) -> int:
    from .estimator import arm_decay_study
    from .plotting import plot_arms

    params = ModelParams(Fraction(cfg["s"]))
    color = B if cfg["color"] == "B" else Y
    st = arm_decay_study(cfg["n_mesh"], cfg["m"], params, cfg["samples"], cfg["seed"], cfg["period"],
                         color, cfg["workers"])
    rep = Report(cfg)
    for n, e in zip(st.n_list, st.estimates):
        rep.add(n, f"one_arm_{cfg['color']}@m={st.m}", e.mean, e.stderr, e.n)
    nan = float("nan")
    rep.add("", "loglog_slope", nan if st.slope is None else st.slope, nan if st.slope_err is None else st.slope_err,
            len(st.n_list) - len(st.censored))
    rep.write_csv()
    plot_arms(st, rep.path(".png"))
    rep.write_manifest(censored=st.censored)
    return EXIT_OK


def cmd_contour(cfg: dict) -> int:
    from .estimator import CONTOURS, contour_self_tests, contour_vanishing_study
    from .plotting import plot_contour

    rep = Report(cfg)
    worst = 0.0
    for N in cfg["n_mesh"]:
        for name, val, exact in contour_self_tests(CONTOURS[cfg["contour"]](N), N):
            err = abs(val - exact)
            worst = max(worst, err)
            rep.add(N, name, err, 0.0, 0)
    if cfg["self_test"]:
        rep.write_csv()
        rep.write_manifest(max_self_test_error=worst)
        return EXIT_OK if worst <= 1e-12 else EXIT_FAILED
    params = ModelParams(Fraction(cfg["s"]))
    rows = contour_vanishing_study(cfg["n_mesh"], params, cfg["samples"], cfg["seed"], cfg["period"],
                                   cfg["contour"], cfg["workers"])
    for r in rows:
        rep.add(r["N"], f"|I({r['pair']})|", r["abs"], r["stderr"], r["n"])
        rep.add(r["N"], f"Re I({r['pair']})", r["value"].real, r["stderr_re"], r["n"])
        rep.add(r["N"], f"Im I({r['pair']})", r["value"].imag, r["stderr_im"], r["n"])
    rep.write_csv()
    plot_contour(rows, rep.path(".png"))
    rep.write_manifest(max_self_test_error=worst)
    return EXIT_OK if worst <= 1e-12 else EXIT_FAILED


COMMANDS = {
    "oracle-verify": cmd_oracle_verify,
    "cardy": cmd_cardy,
    "render": cmd_render,
    "crossing": cmd_crossing,
    "arms": cmd_arms,
    "contour": cmd_contour,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on bad flags, which matches the validation code
        return int(e.code or 0)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg["command"]](cfg)
    except ConfigError as e:
        print(f"floralperc: error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
