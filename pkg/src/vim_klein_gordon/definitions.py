from pathlib import Path

from dagster import definitions, load_from_defs_folder


@definitions
def defs():
    """Assets, resources and the report IO manager under `defs/`."""
    return load_from_defs_folder(path_within_project=Path(__file__).parent)
