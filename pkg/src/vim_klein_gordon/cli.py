"""`vim-kg` command line: run, sweep, verify and dump."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import dagster as dg

from vim_klein_gordon.core.airy import airy_coeffs
from vim_klein_gordon.core.engine import initial_state, run
from vim_klein_gordon.core.errors import ConfigError, VimError
from vim_klein_gordon.core.multiplier import build_alpha_table
from vim_klein_gordon.runner import (
    EMITS,
    MODES,
    RunConfig,
    SweepConfig,
    execute_run,
    execute_sweep,
)
from vim_klein_gordon.verify import DEFAULT_SEED, run_suite

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

# flag dest -> config key
RUN_FLAGS = {
    "mode": "mode",
    "N": "N",
    "K": "K",
    "steps": "steps",
    "R": "R",
    "grid": "grid",
    "lambda_grid": "lambda_grid",
    "tail_tol": "tail_tol",
    "emit": "emit",
    "verify": "verify",
}


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--mode", choices=MODES)
    parser.add_argument("--N", type=int, help="Truncation order of lambda_N")
    parser.add_argument("--K", type=int, help="Working order in full-lambda mode")
    parser.add_argument("--steps", type=int, help="Number of VIM steps")
    parser.add_argument("--R", type=float, help="Radius of the error window")
    parser.add_argument("--grid", type=int, help="Half-grid size for sup errors")
    parser.add_argument(
        "--lambda-grid", type=int, help="Lattice size for the sup of lambda"
    )
    parser.add_argument(
        "--tail-tol", type=float, help="Tail tolerance of the reference series"
    )
    parser.add_argument("--emit", choices=EMITS)
    parser.add_argument(
        "--verify",
        action="store_true",
        default=None,
        help="Cross-check steps and assert the bounds",
    )
    parser.add_argument("--out", type=Path, help="Write the report here")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vim-kg",
        description="Exact VIM iterations for phi'' + r phi + phi = 0",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run one iteration")
    _add_run_flags(run_parser)

    sweep_parser = commands.add_parser("sweep", help="Compare truncation orders")
    _add_run_flags(sweep_parser)
    sweep_parser.add_argument(
        "--N-values",
        default="3,4,5",
        help="Comma separated truncation orders",
    )
    sweep_parser.add_argument("--workers", type=int, default=1)

    verify_parser = commands.add_parser("verify", help="Run the invariant suite")
    verify_parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    verify_parser.add_argument("--out", type=Path)

    dump_parser = commands.add_parser("dump", help="Dump exact series as JSON")
    dump_parser.add_argument("what", choices=("alpha", "airy", "iterate"))
    dump_parser.add_argument(
        "--order", type=int, default=5, help="Highest index for alpha and airy"
    )
    _add_run_flags(dump_parser)
    return parser


def load_config_data(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults < --config file < flags."""
    data: dict[str, Any] = {}
    if args.config is not None:
        try:
            data.update(json.loads(args.config.read_text()))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
    for dest, key in RUN_FLAGS.items():
        value = getattr(args, dest, None)
        if value is not None:
            data[key] = value
    return data


def parse_orders(text: str) -> list[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"bad N list {text!r}") from e


def _write(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig.from_mapping(load_config_data(args))
    report = execute_run(config)
    _write(report.render(), args.out)
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_sweep(args: argparse.Namespace) -> int:
    base = RunConfig.from_mapping(load_config_data(args))
    config = SweepConfig(
        base=base,
        truncation_orders=parse_orders(args.N_values),
        workers=args.workers,
    )
    _write(execute_sweep(config).to_csv(), args.out)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    summary = run_suite(args.seed)
    _write(summary.render(), args.out)
    return EXIT_OK if summary.ok else EXIT_FAILED


def dump_document(what: str, order: int, config: RunConfig) -> Any:
    if what == "alpha":
        return build_alpha_table(max(order, 2)).to_json()[: order + 1]
    if what == "airy":
        return airy_coeffs(order).to_json()
    if what == "iterate":
        if config.steps < 0:
            raise ConfigError(f"steps must be >= 0, got {config.steps}")
        mode = config.engine_mode()
        if config.steps == 0:
            return initial_state(mode).phi.to_json()
        return run(mode, config.steps)[-1].phi.to_json()
    raise ConfigError(f"unknown dump selector {what!r}")


def cmd_dump(args: argparse.Namespace) -> int:
    if args.order < 0:
        raise ConfigError(f"order must be >= 0, got {args.order}")
    config = RunConfig.from_mapping(load_config_data(args))
    document = dump_document(args.what, args.order, config)
    _write(json.dumps(document) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "dump": cmd_dump,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    logger = dg.get_dagster_logger()
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (VimError, AssertionError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED


def run_cli() -> None:
    sys.exit(main())
