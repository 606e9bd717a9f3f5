"""Run and sweep orchestration plus CSV/JSON report emission."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

import dagster as dg

from vim_klein_gordon import __version__
from vim_klein_gordon.core.airy import airy_coeffs, airy_reference_for
from vim_klein_gordon.core.bounds import (
    BoundParams,
    ErrorRecord,
    bound_covers,
    bound_params,
    comp1_violations,
    error_identity_check,
    sup_error,
    theorem1_bound,
)
from vim_klein_gordon.core.engine import (
    DEFAULT_WORKING_ORDER,
    FullLambda,
    IterateState,
    Mode,
    PartialSum,
    airy_prefix_length,
    degree_bound,
    multiplier_order,
    run,
    step_direct,
)
from vim_klein_gordon.core.errors import ConfigError
from vim_klein_gordon.core.exact import UniPoly, rational_to_str
from vim_klein_gordon.core.multiplier import (
    AlphaTable,
    LambdaTruncation,
    build_alpha_table,
    sup_lambda_estimate,
)

CSV_HEADER = (
    "n",
    "degree",
    "airy_prefix_len",
    "sup_error",
    "theorem1_bound",
    "max_abs_coeff",
)
MODES = ("partial-sum", "full-lambda")
EMITS = ("csv", "json")

# short keys used by flags and config files -> RunConfig fields
CONFIG_KEYS = {
    "mode": "mode",
    "N": "truncation_order",
    "K": "working_order",
    "steps": "steps",
    "R": "radius",
    "grid": "grid",
    "lambda_grid": "lambda_grid",
    "tail_tol": "tail_tol",
    "emit": "emit",
    "verify": "verify",
}


def format_float(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.16e}"


class RunConfig(dg.Config):
    mode: str = "partial-sum"
    truncation_order: int = 3
    working_order: int = DEFAULT_WORKING_ORDER
    steps: int = 10
    radius: float = 1.0
    grid: int = 1000
    lambda_grid: int = 201
    tail_tol: float = 1e-30
    emit: str = "csv"
    verify: bool = False

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> RunConfig:
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**{CONFIG_KEYS[key]: value for key, value in data.items()})
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

    def echo(self) -> dict[str, Any]:
        return {key: getattr(self, name) for key, name in CONFIG_KEYS.items()}

    def check(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.emit not in EMITS:
            raise ConfigError(f"emit must be one of {EMITS}, got {self.emit!r}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if not self.radius > 0:
            raise ConfigError(f"R must be > 0, got {self.radius}")
        if self.grid < 2 or self.lambda_grid < 2:
            raise ConfigError("grid and lambda_grid must be >= 2")
        if not self.tail_tol > 0:
            raise ConfigError(f"tail_tol must be > 0, got {self.tail_tol}")
        if self.mode == "partial-sum" and self.truncation_order < 2:
            raise ConfigError(
                f"N must be >= 2 in partial-sum mode, got {self.truncation_order}"
            )
        if self.mode == "full-lambda":
            if self.working_order < 2:
                raise ConfigError(f"K must be >= 2, got {self.working_order}")
            advised = 2 * self.truncation_order + 2 * self.steps
            if self.working_order < advised:
                dg.get_dagster_logger().warning(
                    f"K={self.working_order} is below the advised "
                    f"2N+2*steps={advised}"
                )

    def engine_mode(self) -> Mode:
        if self.mode == "full-lambda":
            return FullLambda(self.working_order)
        return PartialSum(self.truncation_order)


class SweepConfig(dg.Config):
    base: RunConfig
    truncation_orders: list[int] = [3, 4, 5]
    workers: int = 1

    def check(self) -> None:
        if not self.truncation_orders:
            raise ConfigError("N_values must be nonempty")
        if any(N < 2 for N in self.truncation_orders):
            raise ConfigError(f"every N must be >= 2: {self.truncation_orders}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        self.member(self.truncation_orders[0]).check()

    def member(self, N: int) -> RunConfig:
        data = {**self.base.echo(), "mode": "partial-sum", "N": N}
        return RunConfig.from_mapping(data)


@dataclass
class RunReport:
    config: RunConfig
    params: BoundParams
    records: list[ErrorRecord]
    final_iterate: UniPoly
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def rows(self) -> list[list[str]]:
        return [
            [
                str(record.n),
                str(record.degree),
                str(record.prefix_len),
                format_float(record.sup_error),
                format_float(record.theorem1_bound),
                rational_to_str(record.max_coeff),
            ]
            for record in self.records
        ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(self.rows())
        return buffer.getvalue()

    def to_json(self) -> dict[str, Any]:
        return {
            "version": __version__,
            "config": self.config.echo(),
            "bounds": self.params.to_json(),
            "header": list(CSV_HEADER),
            "rows": self.rows(),
            "final_iterate": self.final_iterate.to_json(),
            "violations": self.violations,
        }

    def render(self) -> str:
        if self.config.emit == "json":
            return json.dumps(self.to_json(), indent=2) + "\n"
        return self.to_csv()


@dataclass
class SweepReport:
    truncation_orders: list[int]
    errors: list[list[float]]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        header = [f"sup_error_N{N}" for N in self.truncation_orders]
        writer.writerow(["n", *header])
        steps = len(self.errors[0]) - 1
        for n in range(1, steps + 1):
            writer.writerow(
                [str(n)] + [format_float(column[n]) for column in self.errors]
            )
        return buffer.getvalue()

    def to_json(self) -> dict[str, Any]:
        return {
            "version": __version__,
            "N_values": self.truncation_orders,
            "csv": self.to_csv(),
        }


def _cross_check(
    states: list[IterateState], lam: LambdaTruncation
) -> list[str]:
    found = []
    for prev, following in zip(states, states[1:]):
        if step_direct(prev, lam).phi != following.phi:
            found.append(f"scatter-equals-direct: step {prev.n}->{following.n}")
    return found


def _structure_violations(
    states: list[IterateState], prefixes: list[int]
) -> list[str]:
    found = []
    for state, prefix in zip(states, prefixes):
        bound = degree_bound(state.mode, state.n)
        if bound is not None and state.degree > bound:
            found.append(
                f"degree-bound: n={state.n} degree {state.degree} > {bound}"
            )
        if prefix < 2 * state.n + 1:
            found.append(
                f"airy-prefix: n={state.n} prefix {prefix} < {2 * state.n + 1}"
            )
    return found


def _error_identity_violations(
    states: list[IterateState], lam: LambdaTruncation
) -> list[str]:
    K = states[0].mode.K
    reference = airy_coeffs(K)
    return [
        f"error-identity: step {prev.n}->{following.n}"
        for prev, following in zip(states, states[1:])
        if not error_identity_check(prev, following, lam, reference, K)
    ]


def execute_run(
    config: RunConfig, table: Optional[AlphaTable] = None
) -> RunReport:
    config.check()
    logger = dg.get_dagster_logger()
    mode = config.engine_mode()
    order = multiplier_order(mode)
    if table is None or table.order < order:
        table = build_alpha_table(max(order, 2))
    lam = LambdaTruncation(order, table)

    logger.info(
        f"Running {mode.label} for {config.steps} steps, R={config.radius}"
    )
    states = run(mode, config.steps, table)

    reference = airy_reference_for(config.radius, config.tail_tol)
    errors = [
        sup_error(
            state.phi, reference, config.radius, config.grid, config.tail_tol
        )
        for state in states
    ]
    M = sup_lambda_estimate(lam, config.radius, config.lambda_grid, mirrored=True)
    params = bound_params(states, table, M, config.radius)

    exact_reference = airy_coeffs(max(3, max(state.degree for state in states)))
    prefixes = [airy_prefix_length(state, exact_reference) for state in states]
    full = isinstance(mode, FullLambda)
    records = [
        ErrorRecord(
            n=state.n,
            sup_error=error,
            theorem1_bound=(
                theorem1_bound(state.n, M, config.radius, errors[0])
                if full
                else None
            ),
            max_coeff=state.phi.max_abs_coeff(),
            prefix_len=prefix,
            degree=state.degree,
        )
        for state, error, prefix in zip(states, errors, prefixes)
    ]

    violations: list[str] = []
    if config.verify:
        violations += _cross_check(states, lam)
        violations += _structure_violations(states, prefixes)
        if full:
            violations += _error_identity_violations(states, lam)
            if config.radius <= 1:
                violations += [
                    f"theorem1-coverage: n={record.n}"
                    for record in records
                    if not bound_covers(
                        record.sup_error,
                        record.theorem1_bound,
                        config.tail_tol,
                    )
                ]
        else:
            violations += [
                f"comp1-coverage: n={n} m={m}"
                for n, m in comp1_violations(states, params)
            ]
        for violation in violations:
            logger.error(f"Invariant failed: {violation}")

    logger.info(
        f"{mode.label}: sup error {errors[-1]:.3e} after {config.steps} steps"
    )
    return RunReport(config, params, records, states[-1].phi, violations)


def _sweep_member(data: dict[str, Any]) -> list[float]:
    report = execute_run(RunConfig.from_mapping(data))
    return [record.sup_error for record in report.records]


def execute_sweep(config: SweepConfig) -> SweepReport:
    config.check()
    logger = dg.get_dagster_logger()
    members = [config.member(N).echo() for N in config.truncation_orders]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            errors = list(pool.map(_sweep_member, members))
    else:
        errors = [_sweep_member(member) for member in members]
    for N, column in zip(config.truncation_orders, errors):
        logger.info(f"N={N}: final sup error {column[-1]:.3e}")
    return SweepReport(list(config.truncation_orders), errors)
