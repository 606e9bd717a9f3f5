import json

import pytest

from vim_klein_gordon import __version__
from vim_klein_gordon.core.errors import ConfigError
from vim_klein_gordon.runner import (
    CSV_HEADER,
    RunConfig,
    SweepConfig,
    execute_run,
    execute_sweep,
)


def small_config(**overrides) -> RunConfig:
    data = {"N": 3, "steps": 1, "R": 1.0, "grid": 100, "lambda_grid": 21}
    data.update(overrides)
    return RunConfig.from_mapping(data)


def parse_csv(text: str) -> list[list[str]]:
    return [line.split(",") for line in text.strip().split("\n")]


@pytest.mark.parametrize(
    "overrides",
    [
        {"steps": 0},
        {"R": 0.0},
        {"N": 1},
        {"mode": "picard"},
        {"emit": "xml"},
        {"mode": "full-lambda", "K": 1},
    ],
)
def test_invalid_configs(overrides):
    with pytest.raises(ConfigError):
        small_config(**overrides).check()


def test_unknown_key():
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"steps": 2, "radius_of_doom": 3})


def test_echo_uses_short_keys():
    echo = small_config().echo()
    assert echo["N"] == 3
    assert echo["R"] == 1.0
    assert RunConfig.from_mapping(echo) == small_config()


def test_one_partial_sum_step():
    report = execute_run(small_config())
    rows = parse_csv(report.to_csv())
    assert ",".join(rows[0]) == ",".join(CSV_HEADER)
    assert len(rows) == 3
    n, degree, prefix, error, bound, max_coeff = rows[2]
    assert (n, degree, prefix) == ("1", "6", "3")
    assert bound == ""
    assert max_coeff == "1"
    assert "e" in error
    assert float(error) < float(rows[1][3])


def test_output_is_deterministic():
    config = small_config(steps=2)
    assert execute_run(config).to_csv() == execute_run(config).to_csv()


def test_partial_sum_run_with_verification():
    report = execute_run(small_config(steps=4, verify=True))
    assert report.ok, report.violations
    assert report.params.C == 3
    assert report.params.mu == 7


def test_full_lambda_run_with_verification():
    config = small_config(mode="full-lambda", K=30, steps=3, verify=True)
    report = execute_run(config)
    assert report.ok, report.violations
    bounds = [row[4] for row in report.rows()]
    assert all(bounds)
    assert float(bounds[0]) == pytest.approx(float(report.rows()[0][3]))


def test_long_full_lambda_run_stays_covered():
    config = small_config(
        mode="full-lambda",
        K=120,
        steps=20,
        grid=100,
        lambda_grid=201,
        verify=True,
    )
    report = execute_run(config)
    assert report.ok, report.violations
    errors = [float(row[3]) for row in report.rows()]
    assert errors[-1] < 1e-16
    assert errors[-1] < errors[10]


def test_json_report():
    report = execute_run(small_config(steps=2, emit="json"))
    document = json.loads(report.render())
    assert document["version"] == __version__
    assert document["config"]["N"] == 3
    assert document["bounds"]["C"] == "3"
    assert len(document["rows"]) == 3
    assert document["final_iterate"][0] == "1"
    assert document["violations"] == []


def test_sweep_shape():
    config = SweepConfig(
        base=small_config(steps=3, grid=50), truncation_orders=[3, 4]
    )
    rows = parse_csv(execute_sweep(config).to_csv())
    assert rows[0] == ["n", "sup_error_N3", "sup_error_N4"]
    assert [row[0] for row in rows[1:]] == ["1", "2", "3"]
    assert all(len(row) == 3 for row in rows)


def test_sweep_separates_truncation_orders():
    config = SweepConfig(
        base=small_config(steps=10, grid=40), truncation_orders=[3, 4]
    )
    last = parse_csv(execute_sweep(config).to_csv())[-1]
    assert float(last[1]) < 1e-12
    assert last[1] != last[2]


def test_sweep_forces_partial_sums():
    config = SweepConfig(
        base=small_config(mode="full-lambda"), truncation_orders=[5]
    )
    member = config.member(5)
    assert member.mode == "partial-sum"
    assert member.truncation_order == 5


@pytest.mark.parametrize("orders", [[], [3, 1]])
def test_invalid_sweeps(orders):
    config = SweepConfig(base=small_config(), truncation_orders=orders)
    with pytest.raises(ConfigError):
        execute_sweep(config)
