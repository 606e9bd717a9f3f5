import json
import os
from typing import Any

import dagster as dg

DEFAULT_REPORT_DIR = "data/reports"


class ReportIOManager(dg.IOManager):
    """Writes each asset value as `<asset>.json` (and `<asset>.csv` when the
    value renders one) under `base_dir`. Rationals stay exact strings."""

    def __init__(self, base_dir: str):
        self.base_dir = base_dir
        os.makedirs(self.base_dir, exist_ok=True)

    def _path(self, context, suffix: str) -> str:
        name = context.asset_key.path[-1]
        return os.path.join(self.base_dir, f"{name}{suffix}")

    def handle_output(self, context: "dg.OutputContext", obj: Any) -> None:
        document = obj.to_json() if hasattr(obj, "to_json") else obj
        with open(self._path(context, ".json"), "w") as f:
            json.dump(document, f, indent=2)

        if hasattr(obj, "to_csv"):
            with open(self._path(context, ".csv"), "w") as f:
                f.write(obj.to_csv())

    def load_input(self, context: "dg.InputContext") -> Any:
        file_path = self._path(context, ".json")
        if not os.path.exists(file_path):
            return None

        with open(file_path, "r") as f:
            return json.load(f)


@dg.io_manager(config_schema={"base_dir": str})
def report_io_manager(init_context) -> ReportIOManager:
    return ReportIOManager(base_dir=init_context.resource_config["base_dir"])
