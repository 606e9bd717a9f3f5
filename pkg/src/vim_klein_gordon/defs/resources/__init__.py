import os

import dagster as dg

from vim_klein_gordon.defs.io_managers import (
    DEFAULT_REPORT_DIR,
    report_io_manager,
)
from vim_klein_gordon.defs.resources.engine import VimEngineResource


@dg.definitions
def resources() -> dg.Definitions:
    return dg.Definitions(
        resources={
            "vim_engine": VimEngineResource(),
            "report_io_manager": report_io_manager.configured(
                {"base_dir": os.getenv("VIM_REPORT_DIR", DEFAULT_REPORT_DIR)}
            ),
        }
    )
