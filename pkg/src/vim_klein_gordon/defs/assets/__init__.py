import dagster as dg

from vim_klein_gordon.defs.assets.reference import airy_reference, alpha_table
from vim_klein_gordon.defs.assets.runs import (
    convergence_run,
    invariant_suite,
    n_sweep,
)


@dg.definitions
def assets() -> dg.Definitions:
    return dg.Definitions(
        assets=[
            alpha_table,
            airy_reference,
            convergence_run,
            n_sweep,
            invariant_suite,
        ],
    )
