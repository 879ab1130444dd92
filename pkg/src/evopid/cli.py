"""Command-line entry points: tune, step, and oracle subcommands."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .ep import EvaluationError, Individual
from .harness import (
    ConfigError,
    build_environment,
    build_experiment_spec,
    grid_oracle,
    export_trace,
    parse_config_file,
    parse_grid_file,
    render_result_table,
    run_experiment,
)
from .metrics import step_metrics
from .plant import simulate_route


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evopid",
        description="Tune paired velocity PID gains with evolutionary programming on a surrogate plant.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tune = sub.add_parser("tune", help="run one preset tuning experiment and log every generation")
    tune.add_argument("--experiment", type=int, required=True, choices=(1, 2, 3), help="preset experiment id")
    tune.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    tune.add_argument("--out", type=Path, default=None, help="output directory (default results/experiment_N)")
    tune.add_argument("--config", type=Path, default=None, help="flat key=value override file")

    step = sub.add_parser("step", help="simulate one gain set on a route and report step metrics")
    step.add_argument(
        "--gains",
        required=True,
        help="six comma-separated gains: kpv,kiv,kdv,kpa,kia,kda",
    )
    step.add_argument("--route", required=True, choices=("train", "test"))
    step.add_argument("--out", type=Path, default=Path("step_trace.csv"), help="trace CSV path")
    step.add_argument("--config", type=Path, default=None, help="flat key=value override file")

    oracle = sub.add_parser("oracle", help="exhaustive grid search baseline over gain values")
    oracle.add_argument("--grid", type=Path, required=True, help="grid file: lines `kp|ki|kd = v1, v2, ...`")
    oracle.add_argument("--route", choices=("train", "test"), default="train")
    oracle.add_argument("--out", type=Path, default=None, help="optional JSON output path")
    oracle.add_argument("--config", type=Path, default=None, help="flat key=value override file")

    return parser


def _overrides(path: Path | None) -> dict[str, float]:
    return parse_config_file(path) if path is not None else {}


def _cmd_tune(args: argparse.Namespace) -> int:
    spec = build_experiment_spec(
        args.experiment, seed=args.seed, output_dir=args.out, overrides=_overrides(args.config)
    )
    record = run_experiment(spec)
    print(render_result_table([record]))
    print(f"stop reason: {record.stop_reason.value} after {record.generations_run} generations")
    print(f"wrote generations.csv, best_train_trace.csv, best_test_trace.csv, result.json to {spec.output_dir}")
    return 0


def _parse_gains(text: str) -> Individual:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 6:
        raise ValueError(f"--gains needs 6 values (kpv,kiv,kdv,kpa,kia,kda), got {len(parts)}")
    return Individual.from_flat([float(p) for p in parts])


def _cmd_step(args: argparse.Namespace) -> int:
    individual = _parse_gains(args.gains)
    plant, sim, routes = build_environment(_overrides(args.config))
    route = routes[args.route]
    trace = simulate_route(individual, route, plant, sim)
    export_trace(trace, args.out)
    print(f"wrote trace to {args.out}")
    for name, channel in (("linear", trace.linear), ("angular", trace.angular)):
        m = step_metrics(channel, route)
        rise = "never reached 90%" if m.rise_time is None else f"{m.rise_time:.4f} s"
        print(
            f"{name:7s} rise_time={rise}  overshoot={m.overshoot:.4f}  "
            f"steady_state_error={m.steady_state_error:.6g}"
        )
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    grid = parse_grid_file(args.grid)
    plant, sim, routes = build_environment(_overrides(args.config))
    result = grid_oracle(routes[args.route], plant, sim, grid)
    for name, gains, ae in (
        ("linear", result.linear_gains, result.ae_linear),
        ("angular", result.angular_gains, result.ae_angular),
    ):
        print(f"{name:7s} kp={gains.kp:.6g} ki={gains.ki:.6g} kd={gains.kd:.6g}  ae={ae:.6g}")
    if args.out is not None:
        import json

        payload = {
            "route": args.route,
            "linear": {"kp": result.linear_gains.kp, "ki": result.linear_gains.ki, "kd": result.linear_gains.kd, "ae": result.ae_linear},
            "angular": {"kp": result.angular_gains.kp, "ki": result.angular_gains.ki, "kd": result.angular_gains.kd, "ae": result.ae_angular},
        }
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.out}")
    return 0


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        if args.command == "tune":
            return _cmd_tune(args)
        if args.command == "step":
            return _cmd_step(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
    except (ConfigError, EvaluationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
