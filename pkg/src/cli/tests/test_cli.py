from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from click.testing import CliRunner
import pytest

from src.cli.hyperfrac import main


SMALL_GRID = ["--nodes", "40", "--rho-max", "12"]


def _run(*args: str):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def _read_csv(path: Path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def test_tabulate_green_is_decreasing(tmp_path: Path) -> None:
    out = tmp_path / "green.csv"
    result = _run("tabulate", "green", "--n", "3", "--s", "0.5", "--nodes", "30", "--out", str(out))
    assert result.exit_code == 0, result.output
    rows = _read_csv(out)
    assert rows[0] == ["rho", "value"]
    values = [float(v) for _, v in rows[1:]]
    assert len(values) == 29
    assert all(b < a for a, b in zip(values, values[1:]))
    assert b"\r\n" not in out.read_bytes()


def test_tabulate_density_is_quadratic_in_three_dimensions(tmp_path: Path) -> None:
    out = tmp_path / "density.json"
    result = _run(
        "tabulate", "density", "--n", "3", "--nodes", "11", "--lambda-max", "5",
        "--format", "json", "--out", str(out),
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["columns"] == ["lambda", "value"]
    for lam, value in payload["rows"][1:]:
        assert value / lam**2 == pytest.approx(1.0 / (2.0 * math.pi**2), rel=1e-12)


def test_bad_grid_is_a_usage_error() -> None:
    result = _run("tabulate", "green", "--nodes", "0")
    assert result.exit_code == 2


def test_supercritical_exponent_is_a_usage_error() -> None:
    result = _run("solve", "--n", "3", "--s", "0.5", "--p", "3", *SMALL_GRID)
    assert result.exit_code == 2
    assert "critical exponent" in result.output


def test_critical_exponent_needs_the_flag() -> None:
    result = _run("solve", "--n", "3", "--s", "0.5", "--p", "2", *SMALL_GRID)
    assert result.exit_code == 2
    assert "allow_critical" in result.output


def test_solve_writes_matching_csv_and_json(tmp_path: Path) -> None:
    csv_out = tmp_path / "u.csv"
    json_out = tmp_path / "u.json"
    common = ("solve", "--n", "3", "--s", "0.5", "--p", "1.5", *SMALL_GRID)
    first = _run(*common, "--out", str(csv_out))
    assert first.exit_code == 0, first.output
    second = _run(*common, "--format", "json", "--out", str(json_out))
    assert second.exit_code == 0, second.output

    rows = _read_csv(csv_out)
    assert rows[0] == ["rho", "u"]
    payload = json.loads(json_out.read_text(encoding="utf-8"))
    assert [float(u) for _, u in rows[1:]] == payload["u"]
    assert payload["report"]["converged"] is True
    assert payload["report"]["monotone_flag"] is True

    sidecar = json.loads((tmp_path / "u.report.json").read_text(encoding="utf-8"))
    assert sidecar["iterations"] == payload["report"]["iterations"]

    again = tmp_path / "again.csv"
    assert _run(*common, "--out", str(again)).exit_code == 0
    assert again.read_bytes() == csv_out.read_bytes()


def test_hls_exponent_range_is_checked() -> None:
    result = _run("check", "hls", "--n", "3", "--lambda-exp", "3")
    assert result.exit_code == 2


def test_asymptotics_suite_reports_json(tmp_path: Path) -> None:
    out = tmp_path / "asymptotics.json"
    result = _run("check", "asymptotics", "--n", "3", "--s", "0.5", "--format", "json", "--out", str(out))
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["suite"] == "asymptotics"
    assert payload["passed"] is True
    assert all(claim["passed"] for claim in payload["claims"])


def test_unknown_suite_is_a_usage_error() -> None:
    assert _run("check", "nonsense").exit_code == 2


def test_unwritable_output_fails_cleanly(tmp_path: Path) -> None:
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    result = _run("tabulate", "density", "--nodes", "5", "--out", str(blocker / "table.csv"))
    assert result.exit_code == 1


@pytest.mark.parametrize(
    "suite, extra",
    [
        ("inversion", ("--n", "3", "--s", "0.5")),
        ("plancherel", ("--n", "3")),
        ("maxprinciple", ("--n", "3", "--s", "0.5")),
        ("hls", ("--n", "3", "--lambda-exp", "2")),
    ],
)
def test_check_suites_pass_on_default_settings(tmp_path: Path, suite: str, extra: tuple) -> None:
    out = tmp_path / f"{suite}.json"
    result = _run("check", suite, *extra, "--format", "json", "--out", str(out))
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text(encoding="utf-8"))
    failing = [claim for claim in payload["claims"] if not claim["passed"]]
    assert payload["passed"] is True, failing


def test_critical_solve_converges_with_the_flag(tmp_path: Path) -> None:
    out = tmp_path / "critical.json"
    result = _run(
        "solve", "--n", "3", "--s", "0.5", "--p", "2", "--allow-critical", *SMALL_GRID,
        "--format", "json", "--out", str(out),
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text(encoding="utf-8"))["report"]
    assert report["critical"] is True
    assert report["converged"] is True
    assert report["residual"] < 1e-3
    assert report["monotone_flag"] is True
