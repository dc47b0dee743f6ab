"""Command-line front end: ``simulate``, ``verify``, ``zeta`` and ``example``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import suites
from .config import DEFAULT_THRESHOLDS, PRESETS, ExperimentConfig, preset
from .engine import path_rng, simulate
from .harness import _jsonable, path_stats, aggregate
from .payoff import ConfigError, parse_distribution_literal
from .zeta import DEFAULT_TOL, DomainError, proportions_given_zeta, solve_zeta

OUT_DIR_ENV = "GROMARKET_OUT_DIR"

log = logging.getLogger("gromarket")


def _out_dir(args, cfg: ExperimentConfig | None = None) -> Path:
    d = args.out_dir or os.environ.get(OUT_DIR_ENV) or (cfg.out_dir if cfg else "out")
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    d = cfg.to_dict()
    for key in ("seed", "paths", "horizon"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    for key in DEFAULT_THRESHOLDS:
        v = getattr(args, f"threshold_{key}", None)
        if v is not None:
            d["thresholds"][key] = v
    return ExperimentConfig.from_dict(d)


def run_simulate(cfg: ExperimentConfig, out: Path) -> dict:
    """Write one CSV per path plus ``summary.json``; returns the summary."""
    proc, rules, y0 = cfg.build()
    stats = []
    for i in range(cfg.paths):
        rec = simulate(proc, rules, y0, cfg.horizon, path_rng(cfg.seed, i))
        rec.write_csv(out / f"{cfg.name}_path{i:04d}.csv")
        stats.append(path_stats(rec))
    summary = _jsonable({"config": cfg.to_dict(), "paths": stats, "aggregates": aggregate(stats)})
    with open(out / f"{cfg.name}_summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    return summary


def run_verify(suite: str, cfg: ExperimentConfig | None = None, fault: float = 0.0) -> list:
    names = suites.SUITES if suite == "all" else (suite,)
    th = cfg.thresholds if cfg else DEFAULT_THRESHOLDS
    results = []
    for name in names:
        kwargs = {}
        if name == "drift":
            kwargs["fault"] = fault
            kwargs["tol"] = th["drift_tol"]
        if name == "dominance":
            kwargs.update(threshold=th["dominance_r"], min_fraction=th["dominance_fraction"])
        if name == "survival":
            kwargs["floor"] = th["survival_floor"]
        if name == "theorem4":
            kwargs["growth_factor"] = th["growth_factor"]
        if name == "example6":
            kwargs["ruin_fraction"] = th["ruin_fraction"]
        if cfg is not None and name in ("drift", "survival"):
            market = cfg.build()
            if fault:
                for r in market[1]:
                    if r.kind == "gro":
                        r.fault = fault
            kwargs.update(markets=[market], horizon=cfg.horizon, seed=cfg.seed)
            kwargs.pop("fault", None)
        if cfg is not None and name == "dominance":
            kwargs.update(market=cfg.build(), horizon=cfg.horizon, seed=cfg.seed, paths=cfg.paths)
        log.info("running suite %s", name)
        results.append(suites.RUNNERS[name](**kwargs))
    return results


def run_zeta(c: float, rho: float, literal: str, tol: float = DEFAULT_TOL) -> dict:
    K = parse_distribution_literal(literal)
    sol = solve_zeta(c, rho, K, tol)
    lam = proportions_given_zeta(sol.zeta, rho, K)
    return {"zeta": sol.zeta, "residual": sol.residual, "in_gamma": sol.in_gamma,
            "lambda": lam.tolist()}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gromarket", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="experiment config (JSON)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--paths", type=int)
        sp.add_argument("--horizon", type=int)
        sp.add_argument("--out-dir", help=f"output directory (env {OUT_DIR_ENV})")
        for key in DEFAULT_THRESHOLDS:
            sp.add_argument(f"--threshold-{key.replace('_', '-')}", dest=f"threshold_{key}",
                            type=float)

    sp = sub.add_parser("simulate", help="simulate trajectories and export CSV")
    common(sp)

    sp = sub.add_parser("verify", help="run property checks; exit 0 iff all pass")
    common(sp)
    sp.add_argument("--suite", default="all", choices=suites.SUITES + ("all",))
    sp.add_argument("--inject-fault", type=float, default=0.0, metavar="F",
                    help="scale GRO proportions by (1-F) in the drift suite")

    sp = sub.add_parser("zeta", help="solve for the cash level and GRO proportions")
    sp.add_argument("-c", type=float, required=True, help="total wealth")
    sp.add_argument("-r", "--rho", type=float, required=True, help="gross interest factor")
    sp.add_argument("-d", "--dist", required=True, help='payoff law, e.g. "0.5:0.5,2:0.5"')
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)

    sp = sub.add_parser("example", help="simulate a bundled preset")
    sp.add_argument("name", choices=sorted(PRESETS))
    common(sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "zeta":
            if not args.c > 0:
                parser.error("-c must be positive")
            res = run_zeta(args.c, args.rho, args.dist, args.tol)
            print(f"zeta={res['zeta']:.17g}")
            print(f"residual={res['residual']:.17g}")
            print(f"in_gamma={str(res['in_gamma']).lower()}")
            print("lambda=" + ",".join(f"{v:.17g}" for v in res["lambda"]))
            return 0

        if args.command == "example":
            cfg = _apply_overrides(preset(args.name), args)
            out = _out_dir(args, cfg)
            run_simulate(cfg, out)
            print(out / f"{cfg.name}_path0000.csv")
            return 0

        cfg = ExperimentConfig.load(args.config) if args.config else None
        if cfg is not None:
            cfg = _apply_overrides(cfg, args)

        if args.command == "simulate":
            if cfg is None:
                parser.error("simulate requires --config")
            out = _out_dir(args, cfg)
            run_simulate(cfg, out)
            print(out)
            return 0

        if args.command == "verify":
            results = run_verify(args.suite, cfg, args.inject_fault)
            report = {"passed": all(r.passed for r in results),
                      "suites": [r.to_dict() for r in results]}
            out = _out_dir(args, cfg)
            path = out / "verify_report.json"
            with open(path, "w") as fh:
                json.dump(report, fh, indent=2, sort_keys=True)
            for r in results:
                print(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.seconds:.1f}s)")
                for k, v in r.checks.items():
                    if not v:
                        print(f"  failed check: {k}")
            print(path)
            return 0 if report["passed"] else 1
    except (ConfigError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
