import dagster as dg

from vim_klein_gordon.core.airy import (
    AirySeries,
    airy_reference_for,
    residual_check,
)
from vim_klein_gordon.core.multiplier import AlphaTable
from vim_klein_gordon.defs.resources import VimEngineResource


class AlphaTableConfig(dg.Config):
    order: int = 121


class AiryReferenceConfig(dg.Config):
    radius: float = 1.0
    tail_tol: float = 1e-30


@dg.asset(
    group_name="reference",
    kinds={"python"},
    io_manager_key="report_io_manager",
    description="""
    Exact coefficient table of the Lagrange multiplier
    lambda(r, s) = sum_k alpha_k(r) (s - r)^k.

    Each alpha_k is stored as its list of exact rational coefficients in r,
    lowest power first; the zero polynomial is the empty list.
    """,
)
def alpha_table(
    context: dg.AssetExecutionContext,
    config: AlphaTableConfig,
    vim_engine: VimEngineResource,
) -> AlphaTable:
    table = vim_engine.alpha_table(config.order)
    table = AlphaTable(table.alphas[: config.order + 1])
    context.add_output_metadata(
        {
            "order": table.order,
            "max_degree": max(alpha.degree for alpha in table.alphas),
        }
    )
    return table


@dg.asset(
    group_name="reference",
    kinds={"python"},
    io_manager_key="report_io_manager",
    description="""
    Airy coefficients a_0..a_K of the exact solution phi, with K grown
    until the tail test holds on |r| <= radius at the configured
    tolerance.
    """,
)
def airy_reference(
    context: dg.AssetExecutionContext, config: AiryReferenceConfig
) -> AirySeries:
    series = airy_reference_for(config.radius, config.tail_tol)
    context.log.info(f"Airy reference of order {series.order}")
    context.add_output_metadata(
        {
            "order": series.order,
            "residual": str(residual_check(series)),
            "max_abs_coeff": str(series.max_abs_coeff()),
        }
    )
    return series
