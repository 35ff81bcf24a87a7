"""Command-line driver: ``muhs <command> [flags]``.

Results go to stdout, logs to stderr (level from MUHS_LOG: error, info or
debug).  Exit codes: 0 success, 2 invalid input, 3 numerical failure,
4 constraint unsatisfiable.  A numerical blow-up detected by ``simulate`` is
a verdict and exits 0.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, evolution, geometry, hierarchy, spectral, waves
from .errors import (ConstraintUnsatisfiable, InvalidInput, MuHSError,
                     NumericalFailure)
from .initspec import parse_init
from .spectral import PeriodicGrid

log = logging.getLogger("muhs")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_CONSTRAINT = 0, 2, 3, 4


def _fmt(value) -> str:
    return format(float(value), ".17g")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if np.isfinite(v) else str(v)
    if isinstance(value, np.integer):
        return int(value)
    return value


def _write_manifest(out: Path, command: str, config: dict, inputs: dict,
                    outputs: list, summary: dict, verdict) -> None:
    payload = {"command": command, "version": __version__, "config": config,
               "inputs": inputs, "outputs": sorted(outputs),
               "summary": summary, "verdict": verdict}
    with (out / "manifest.json").open("w", encoding="utf-8", newline="\n") as handle:
        json.dump(_jsonable(payload), handle, indent=2, sort_keys=True)
        handle.write("\n")


def _out_dir(raw: str | None) -> Path:
    out = Path(raw or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _init_field(text: str, n: int):
    return parse_init(text).field(PeriodicGrid(n))


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    u0 = _init_field(args.init, args.n)
    cfg = evolution.EvolutionConfig(n=args.n, t_end=args.t_end, k=args.k, cfl=args.cfl)
    start = time.perf_counter()
    traj = evolution.integrate(u0, cfg)
    wall = time.perf_counter() - start
    out = _out_dir(args.out)
    diag = traj.diagnostics
    _write_csv(out / "diagnostics.csv",
               ["t", "mu", "H1", "H0", "H2", "Hm1_or_nan", "r0", "min_ux",
                "max_abs_u", "dt"],
               zip(*(diag[name] for name in evolution.DIAGNOSTIC_FIELDS)))
    x = traj.grid.x
    _write_csv(out / "snapshots.csv", ["t", "x", "u"],
               ((t, xi, ui) for t, u in zip(traj.times, traj.states)
                for xi, ui in zip(x, u)))
    verdict = traj.verdict
    summary = {"steps": len(diag["t"]) - 1, "t_final": float(traj.times[-1]),
               "mu_drift": traj.drift("mu"), "H1_drift_rel": traj.drift("H1", True),
               "r0_drift_rel": traj.drift("r0", True), "wall_time_s": wall}
    _write_manifest(out, "simulate", vars_config(cfg), {"init": args.init},
                    ["diagnostics.csv", "snapshots.csv"], summary,
                    {"kind": verdict.kind, "t_est": verdict.t_est,
                     "reason": verdict.reason})
    print(f"verdict: {verdict}")
    if verdict.nonfinite:
        log.error("non-finite values appeared before blow-up was detected")
        return EXIT_NUMERIC
    return EXIT_OK


def vars_config(cfg) -> dict:
    return {name: getattr(cfg, name) for name in cfg.__dataclass_fields__}


def cmd_classify(args) -> int:
    verdict = evolution.classify_initial(_init_field(args.init, args.n))
    print(verdict)
    return EXIT_OK


def _wave_job(c, family, anchor, samples):
    params = waves.solve_period_one(c, family, anchor)
    prof = waves.profile(params, samples)
    return params, prof


def cmd_wave(args) -> int:
    family = {"smooth": waves.Family.SMOOTH, "cusped": waves.Family.CUSPED}[args.family]
    anchors = [float(a) for a in args.m_anchor.split(",") if a.strip()]
    if not anchors:
        raise InvalidInput("--m-anchor needs at least one value")
    jobs = [(args.c, family, a, args.samples) for a in anchors]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_wave_job, *zip(*jobs)))
    else:
        results = [_wave_job(*job) for job in jobs]
    out = _out_dir(args.out)
    outputs, rows = [], []
    for i, (params, prof) in enumerate(results):
        name = "profile.csv" if len(results) == 1 else f"profile_{i}.csv"
        _write_csv(out / name, ["x", "phi"], zip(prof.xs, prof.phis))
        outputs.append(name)
        period = waves.muhs_period(params.c, params.m_lo, params.M_hi)
        row = {"file": name, "c": params.c, "m": params.m_lo, "M": params.M_hi,
               "mu": params.mu, "family": params.family.value, "period": period,
               "mean": prof.mean, "cusp_xs": list(prof.cusp_xs)}
        rows.append(row)
        print(f"{name}: c={params.c:.17g} m={params.m_lo:.17g} M={params.M_hi:.17g} "
              f"mu={params.mu:.17g} period={period:.17g} mean={prof.mean:.17g}")
    summary = rows[0] if len(rows) == 1 else {"waves": rows}
    _write_manifest(out, "wave", {"samples": args.samples, "jobs": args.jobs},
                    {"c": args.c, "family": args.family, "m_anchor": anchors},
                    outputs, summary, "ok")
    return EXIT_OK


def cmd_hierarchy(args) -> int:
    u = _init_field(args.init, args.n)
    if args.as_momentum:
        u = spectral.apply_A_inverse(u)
    orders = [int(o) for o in args.orders.split(",") if o.strip()]
    bad = [o for o in orders if o not in hierarchy.FUNCTIONAL_IDS]
    if bad:
        raise InvalidInput(f"orders must lie in {hierarchy.FUNCTIONAL_IDS}, got {bad}")
    m = hierarchy.momentum(u)
    positive = np.min(m.samples) > hierarchy.POSITIVITY_RATIO * np.max(np.abs(m.samples))
    for order in orders:
        if order < 0 and not positive:
            print(f"H[{order}] undefined: momentum is not positive")
        elif order == -3:
            g = hierarchy.gradient(-3, u)
            print(f"H[-3]  (gradient only)  |dH/dm|_inf = {spectral.sup_norm(g):.17g}")
        else:
            print(f"H[{order}] = {hierarchy.functional_value(order, u):.17g}")
    lp_frozen, lp_explicit = hierarchy.bihamiltonian_residual(u)
    print("residual                          value")
    print(f"B1 dH1 - B2 dH2                   {lp_frozen:.3e}")
    print(f"B1 dH1 - (-2 m u_x - m_x u)       {lp_explicit:.3e}")
    if positive:
        kernel = hierarchy.b1(m, hierarchy.gradient(-1, u))
        print(f"B1 (1/(2 sqrt m))                 {spectral.sup_norm(kernel):.3e}")
        for n in (1, 2):
            gap = abs(hierarchy.hn_from_gradient(n, u) - hierarchy.functional_value(-n, u))
            print(f"H[-{n}] from gradient identity     {gap:.3e}")
        low = hierarchy.lower(hierarchy.gradient(-2, u), m)
        _, fit = hierarchy.kernel_fit(low, hierarchy.gradient(-3, u), m)
        print(f"lowered dH-2 vs dH-3 (kernel fit) {fit:.3e}")
    else:
        print("momentum not positive: negative ladder skipped")
    print(f"Virasoro three-way (k=0)          "
          f"{hierarchy.virasoro_equivalence_residual(u, 0.0):.3e}")
    return EXIT_OK


def cmd_curvature(args) -> int:
    u = _init_field(args.u, args.n)
    v = _init_field(args.v, args.n)
    quad = geometry.curvature_quadratic(u, v)
    expanded = geometry.curvature_expanded(u, v)
    print(f"<R(u,v)v,u> via Christoffel map  = {quad:.17g}")
    print(f"<R(u,v)v,u> via expansion        = {expanded:.17g}")
    print(f"difference                       = {abs(quad - expanded):.3e}")
    print(f"sectional curvature K(u,v)       = {geometry.sectional(u, v):.17g}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    u0 = _init_field(args.init, args.n)
    start = evolution.hill_spectrum(spectral.apply_A(u0), args.count + 1)
    if args.t_end > 0:
        traj = evolution.integrate(u0, evolution.EvolutionConfig(n=args.n, t_end=args.t_end))
        if traj.verdict.is_blowup:
            raise NumericalFailure(f"evolution broke down: {traj.verdict}")
        end = evolution.hill_spectrum(spectral.apply_A(traj.final), args.count + 1)
        t_final = float(traj.times[-1])
    else:
        end, t_final = start, 0.0
    print(f"trivial eigenvalue (constants): {start[0]:.3e} -> {end[0]:.3e}")
    print(f"{'index':>5}  {'t=0':>24}  {'t=' + format(t_final, 'g'):>24}  {'rel drift':>10}")
    for i, (a, b) in enumerate(zip(start[1:], end[1:]), start=1):
        print(f"{i:>5}  {a:>24.17g}  {b:>24.17g}  {abs(b - a) / abs(a):>10.3e}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    failures = run_selftest(args.seed, stream=sys.stdout)
    return EXIT_OK if failures == 0 else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="muhs", description="Numerical laboratory for the mu-Hunter-Saxton equation.")
    parser.add_argument("--version", action="version", version=f"muhs {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve an initial condition")
    p.add_argument("--init", required=True)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--cfl", type=float, default=0.3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="global existence / blow-up criteria")
    p.add_argument("--init", required=True)
    p.add_argument("--n", type=int, default=256)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("wave", help="period-one traveling waves")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--family", choices=["smooth", "cusped"], required=True)
    p.add_argument("--m-anchor", required=True,
                   help="trough value, or a comma-separated list for a sweep")
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_wave)

    p = sub.add_parser("hierarchy", help="conserved functionals and residuals")
    p.add_argument("--init", required=True)
    p.add_argument("--orders", default="-2,-1,0,1,2")
    p.add_argument("--as-momentum", action="store_true",
                   help="read --init as the momentum m = A u instead of u")
    p.add_argument("--n", type=int, default=256)
    p.set_defaults(func=cmd_hierarchy)

    p = sub.add_parser("curvature", help="curvature of the plane span(u, v)")
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--n", type=int, default=64)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("spectrum", help="Hill spectrum before and after evolution")
    p.add_argument("--init", required=True)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--t-end", type=float, default=0.0)
    p.add_argument("--n", type=int, default=256)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("selftest", help="seeded property suite")
    p.add_argument("--seed", type=int, default=12345)
    p.set_defaults(func=cmd_selftest)
    return parser


def _configure_logging():
    level = os.environ.get("MUHS_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _glue_negative_values(argv):
    """Rewrite ``--flag -3,-2`` as ``--flag=-3,-2`` so argparse keeps the value."""
    out, i = [], 0
    while i < len(argv):
        arg = argv[i]
        if (arg.startswith("--") and "=" not in arg and i + 1 < len(argv)
                and re.fullmatch(r"-[\d.][\d.,eE+-]*", argv[i + 1])):
            out.append(f"{arg}={argv[i + 1]}")
            i += 2
        else:
            out.append(arg)
            i += 1
    return out


def main(argv=None) -> int:
    _configure_logging()
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_glue_negative_values(argv))
    log.info("muhs %s: %s", __version__, args.command)
    log.debug("arguments: %s", {k: v for k, v in vars(args).items() if k != "func"})
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConstraintUnsatisfiable as exc:
        print(f"unsatisfiable: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except MuHSError as exc:  # pragma: no cover - every subclass is mapped above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
