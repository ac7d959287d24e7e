"""``qnewsvendor`` command line.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import encoding, report
from .config import ScenarioConfig, load_config
from .model import OrderDecision
from .optimizer import ESTIMATOR_KINDS, evaluate_order, grid_optimize, reliability_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class ConfigError(Exception):
    pass


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def _load(args) -> tuple[ScenarioConfig, Path]:
    try:
        cfg = load_config(args.config)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {exc.filename}") from exc
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from exc
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.estimator is not None:
        updates["estimator"] = cfg.estimator.model_copy(update={"kind": args.estimator})
    if args.out is not None:
        updates["output"] = cfg.output.model_copy(update={"dir": args.out})
    if updates:
        cfg = cfg.model_copy(update=updates)
    try:
        cfg.check()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(cfg.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def _problem(cfg: ScenarioConfig, config_path: str):
    try:
        est = cfg.estimator_choice(Path(config_path).parent)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"estimator.loader_path: {exc}") from exc
    return cfg.market_params(), cfg.supplier_list(), cfg.demand_distribution(), est


def _record(decision: OrderDecision, res, cfg: ScenarioConfig) -> dict:
    rec = {
        "q": list(decision.q),
        "x": list(decision.x),
        "objective": res.estimate,
        "seed": cfg.seed,
        "estimator": cfg.estimator.kind,
    }
    rec.update({k: v for k, v in res.as_dict().items() if k != "estimate"})
    return rec


def cmd_solve(args) -> int:
    cfg, out = _load(args)
    market, suppliers, demand, est = _problem(cfg, args.config)
    dec, res = grid_optimize(market, suppliers, demand, est, cfg.q_grid, cfg.seed)
    rec = _record(dec, res, cfg)
    report.write_json(rec, out / "solve.json")
    print(json.dumps({k: rec[k] for k in ("q", "x", "objective", "ci_low", "ci_high")}))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, out = _load(args)
    market, suppliers, demand, est = _problem(cfg, args.config)
    if len(suppliers) != 2:
        raise ConfigError(f"suppliers: a sweep needs exactly 2 suppliers, got {len(suppliers)}")
    sw = cfg.sweep
    hm = reliability_sweep(
        market, suppliers, demand, est, sw.axis1, sw.axis2, cfg.q_grid, cfg.seed, sw.mode, sw.variance
    )
    report.write_sweep_csv(hm, out / "sweep.csv")
    (out / "sweep.svg").write_text(
        report.render_sweep_svg(hm, f"Expected profit ({cfg.estimator.kind})")
    )
    print(f"wrote {out / 'sweep.csv'} and {out / 'sweep.svg'} ({hm.objective.size} cells)")
    return EXIT_OK


def cmd_estimate(args) -> int:
    cfg, out = _load(args)
    market, suppliers, demand, est = _problem(cfg, args.config)
    q = args.q if args.q is not None else cfg.q
    if q is None:
        raise ConfigError("q: an order vector is required (config key 'q' or --q)")
    try:
        dec = OrderDecision(tuple(q))
        dec.check_capacity(suppliers)
    except ValueError as exc:
        raise ConfigError(f"q: {exc}") from exc
    res = evaluate_order(market, suppliers, dec, demand, est, cfg.seed)
    rec = _record(dec, res, cfg)
    report.write_json(rec, out / "estimate.json")
    print(json.dumps({k: rec[k] for k in ("q", "objective", "ci_low", "ci_high", "oracle_queries")}))
    return EXIT_OK


def cmd_load_dist(args) -> int:
    cfg, out = _load(args)
    demand = cfg.demand_distribution()
    spec = encoding.variational_load(demand, cfg.loader.depth, cfg.loader.budget, cfg.seed)
    learned = encoding.loader_probabilities(spec.circuit())
    report.write_json(spec.to_dict(), out / "loader.json")
    report.write_load_csv(demand.probs, learned, out / "load_dist.csv")
    summary = {
        "divergence": spec.achieved_divergence,
        "depth": spec.depth,
        "budget": cfg.loader.budget,
        "total_variation": float(0.5 * np.abs(demand.probs - learned).sum()),
    }
    report.write_json(summary, out / "load_dist.json")
    print(json.dumps(summary))
    return EXIT_OK


def _q_vector(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnewsvendor",
        description="Unreliable-supplier newsvendor via amplitude estimation and classical baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "solve": (cmd_solve, "optimize the order vector"),
        "sweep": (cmd_sweep, "reliability heatmap over two suppliers"),
        "estimate": (cmd_estimate, "estimate expected profit of one order vector"),
        "load-dist": (cmd_load_dist, "train the variational demand loader"),
    }
    for name, (fn, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--estimator", choices=ESTIMATOR_KINDS, help="estimator (overrides config)")
        if name == "estimate":
            p.add_argument("--q", type=_q_vector, help="order vector, e.g. 0,11")
        p.set_defaults(func=fn)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - stable exit-code contract
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
