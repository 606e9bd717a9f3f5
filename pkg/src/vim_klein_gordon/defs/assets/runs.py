import dagster as dg

from vim_klein_gordon.core.engine import multiplier_order
from vim_klein_gordon.core.errors import ConfigError
from vim_klein_gordon.defs.resources import VimEngineResource
from vim_klein_gordon.runner import (
    RunConfig,
    RunReport,
    SweepConfig,
    SweepReport,
    execute_run,
    execute_sweep,
)
from vim_klein_gordon.verify import DEFAULT_SEED, run_suite


class VerifyConfig(dg.Config):
    seed: int = DEFAULT_SEED


@dg.asset(
    group_name="experiments",
    kinds={"python"},
    io_manager_key="report_io_manager",
    description="""
    One VIM run from phi_0 = 1, in partial-sum or full-lambda mode.

    Rows hold, per iterate: degree, Airy prefix length, sup error on
    [-R, R], the full-lambda error bound and the largest coefficient.
    With `verify` enabled every step is cross-checked against the direct
    integration and the bounds are asserted; any failure fails the asset.
    """,
)
def convergence_run(
    context: dg.AssetExecutionContext,
    config: RunConfig,
    vim_engine: VimEngineResource,
) -> RunReport:
    try:
        config.check()
        order = max(multiplier_order(config.engine_mode()), 2)
        report = execute_run(config, vim_engine.alpha_table(order))
    except ConfigError as e:
        raise dg.Failure(description=f"Invalid run config: {e}") from e

    if not report.ok:
        raise dg.Failure(
            description=f"{len(report.violations)} invariant checks failed",
            metadata={"violations": report.violations[:20]},
        )

    last = report.records[-1]
    context.add_output_metadata(
        {
            "rows": len(report.records),
            "final_sup_error": last.sup_error,
            "final_degree": last.degree,
            "final_prefix_len": last.prefix_len,
            "M": report.params.M,
        }
    )
    return report


@dg.asset(
    group_name="experiments",
    kinds={"python"},
    io_manager_key="report_io_manager",
    description="""
    Sup error by iteration for several truncation orders N at identical
    steps and radius. The comparison is reported, never asserted.
    """,
)
def n_sweep(
    context: dg.AssetExecutionContext, config: SweepConfig
) -> SweepReport:
    try:
        report = execute_sweep(config)
    except ConfigError as e:
        raise dg.Failure(description=f"Invalid sweep config: {e}") from e

    context.add_output_metadata(
        {
            f"final_sup_error_N{N}": column[-1]
            for N, column in zip(report.truncation_orders, report.errors)
        }
    )
    return report


@dg.asset(
    group_name="experiments",
    kinds={"python"},
    description="""
    The full invariant suite: Beta identities, Airy and multiplier tables,
    scatter against direct steps, gather recursion, degree and prefix
    growth, bound coverage and the ratio test.
    """,
)
def invariant_suite(
    context: dg.AssetExecutionContext, config: VerifyConfig
) -> dg.MaterializeResult:
    summary = run_suite(config.seed, progress=context.log.info)
    counts = {
        name: f"{tally.passed} passed, {tally.failed} failed, "
        f"{tally.skipped} skipped"
        for name, tally in summary.tallies.items()
    }
    if not summary.ok:
        raise dg.Failure(
            description=f"{summary.failed} invariant checks failed",
            metadata=counts,
        )
    return dg.MaterializeResult(
        metadata={
            "seed": config.seed,
            "invariants": len(summary.tallies),
            **counts,
        }
    )
