import json
import math
from pathlib import Path

import pytest

from polyharm import __version__
from polyharm.cli import main

GOLDEN = Path(__file__).resolve().parent / "golden"


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured


def _json(captured):
    return json.loads(captured.out)


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_unknown_command_is_usage_error(capsys):
    code, captured = _run(capsys, "frobnicate")
    assert code == 2
    assert "usage" in captured.err


@pytest.mark.parametrize(
    "name,argv",
    [
        ("enumerate_bih_6x6.csv", ("bih", "--m-max", "6", "--ell-max", "6")),
        ("enumerate_bih_10x30.csv", ("bih", "--m-max", "30", "--ell-max", "10")),
        (
            "enumerate_tri_10x30.csv",
            ("tri", "--m-max", "30", "--ell-max", "10", "--no-require-map"),
        ),
    ],
)
def test_enumerate_matches_golden_table(tmp_path, capsys, name, argv):
    out = tmp_path / "table.csv"
    code, _ = _run(capsys, "enumerate", *argv, "--format", "csv", "--output", str(out))
    assert code == 0
    assert out.read_bytes() == (GOLDEN / name).read_bytes()


def test_enumerate_json_reports_discrepancies(capsys):
    code, captured = _run(
        capsys, "enumerate", "tri", "--m-max", "10", "--ell-max", "10", "--no-require-map"
    )
    assert code == 0
    payload = _json(captured)["payload"]
    assert payload["statement_discrepancies"] == [[4, 1], [4, 2], [5, 1]]
    assert payload["corollary_uncovered_m"] == []
    assert "csv" not in payload


def test_solve_triharmonic_first_order(capsys):
    code, captured = _run(capsys, "solve", "tri", "--m", "6", "--ell", "1")
    assert code == 0
    report = _json(captured)
    assert report["command"] == "solve tri"
    payload = report["payload"]
    assert payload["branch"] == "minus"
    assert payload["t_minus"]["value"] == pytest.approx((14 - math.sqrt(61)) / 15, rel=1e-12)
    assert payload["t_minus"]["exact"] == "14/15 - 1/15*sqrt(61)"
    assert payload["closed_form"]["minus"]["agrees"]


def test_solve_biharmonic(capsys):
    code, captured = _run(capsys, "solve", "bih", "--m", "4", "--ell", "4")
    assert code == 0
    assert _json(captured)["payload"]["t_minus"]["exact"] == "1/2"


def test_verify_triharmonic_symbolic(capsys):
    code, captured = _run(capsys, "verify", "triharmonic", "--m", "6", "--ell", "1")
    assert code == 0
    report = _json(captured)
    assert report["status"] == "pass"
    assert all(report["payload"]["proper"].values())


def test_verify_biharmonic_off_root_fails(capsys):
    code, captured = _run(
        capsys, "verify", "biharmonic", "--m", "4", "--ell", "4", "--t", "1/3"
    )
    assert code == 1
    assert _json(captured)["status"] == "fail"


def test_verify_biharmonic_numeric(capsys):
    code, _ = _run(
        capsys, "verify", "biharmonic", "--m", "4", "--ell", "4",
        "--mode", "numeric", "--points", "10",
    )
    assert code == 0


def test_verify_harmonic_numeric_off_zero_fails(capsys):
    code, captured = _run(
        capsys, "verify", "harmonic", "--m", "3", "--ell", "2",
        "--mode", "numeric", "--t", "1/2", "--points", "20",
    )
    assert code == 1
    report = _json(captured)["payload"]["report"]
    assert report["passed"] is False
    assert report["details"]["bounded_away"] is True


def test_verify_triharmonic_numeric(capsys):
    code, captured = _run(
        capsys, "verify", "triharmonic", "--m", "6", "--ell", "1",
        "--mode", "numeric", "--points", "10",
    )
    assert code == 0
    report = _json(captured)["payload"]["report"]
    assert report["passed"] is True
    assert report["details"]["max_magnitude"] < 1e-7


@pytest.mark.integration
def test_verify_triharmonic_acceptance_pair(capsys):
    code, _ = _run(capsys, "verify", "triharmonic", "--m", "4", "--ell", "4")
    assert code == 0


def test_verify_nakauchi(capsys):
    code, captured = _run(capsys, "verify", "nakauchi", "--m", "3", "--ell", "2")
    assert code == 0
    assert _json(captured)["payload"]["report"]["passed"]


def test_numeric_runs_are_deterministic(capsys):
    argv = ("verify", "nakauchi", "--m", "3", "--ell", "2", "--mode", "numeric",
            "--points", "10", "--seed", "9")
    first = _run(capsys, *argv)
    second = _run(capsys, *argv)
    assert first[0] == second[0] == 0
    assert first[1].out == second[1].out
    assert _json(first[1])["seed"] == 9


def test_construct_lists_fields(capsys):
    code, captured = _run(capsys, "construct", "--m", "3", "--ell", "2")
    assert code == 0
    payload = _json(captured)["payload"]
    assert payload["components"] == 9
    assert payload["norm_sq"] == "2/3"
    assert payload["energy_constant"] == "6"


def test_construct_without_map_is_an_error(capsys):
    code, captured = _run(capsys, "construct", "--m", "2", "--ell", "3")
    assert code == 2
    assert "allow_formal" in captured.err
    assert _json(captured)["status"] == "error"


def test_missing_argument_is_an_error(capsys):
    code, captured = _run(capsys, "verify", "biharmonic", "--m", "4")
    assert code == 2
    assert "--ell" in captured.err


def test_csv_is_only_for_enumerate(capsys):
    code, captured = _run(capsys, "solve", "bih", "--m", "4", "--ell", "4", "--format", "csv")
    assert code == 2
    assert _json(captured)["payload"]["error"].startswith("--format csv")


def test_laplacian_closed_form(capsys):
    code, captured = _run(capsys, "laplacian", "--m", "3", "--ell", "2", "--k", "2")
    assert code == 0
    assert "formula" in _json(captured)["payload"]


def test_laplacian_numeric_crosscheck(capsys):
    code, captured = _run(
        capsys, "laplacian", "--m", "3", "--ell", "2", "--k", "1",
        "--mode", "numeric", "--points", "20",
    )
    assert code == 0
    report = _json(captured)["payload"]["report"]
    assert report["passed"] is True
    assert report["details"]["max_relative_error"] <= 1e-5
    assert len(report["details"]["worst_offenders"]) == 5


def test_polyenergy_critical_is_unstable(capsys):
    code, captured = _run(capsys, "polyenergy", "--r", "3", "--critical")
    assert code == 0
    profile = _json(captured)["payload"]["profile"]
    assert profile["sin2_critical"] == "1/3"
    assert profile["stable"] is False


def test_polyenergy_checks_eigenmap(capsys):
    code, captured = _run(
        capsys, "polyenergy", "--r", "2", "--k", "1", "--m", "2", "--points", "10"
    )
    assert code == 0
    payload = _json(captured)["payload"]
    assert payload["eigenmap"]["passed"]
    assert payload["profile"]["energy"] is not None


def test_text_format(capsys):
    code, captured = _run(capsys, "solve", "bih", "--m", "4", "--ell", "4", "--format", "text")
    assert code == 0
    assert "status: pass" in captured.out.splitlines()


def test_run_log_records_each_run(isolated_settings, capsys):
    _run(capsys, "solve", "tri", "--m", "6", "--ell", "1")
    _run(capsys, "construct", "--m", "2", "--ell", "3")
    lines = (isolated_settings / "logs" / "runs.log").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    timestamp, command, status, exit_code, params = lines[0].split("\t")
    assert (command, status, exit_code) == ("solve tri", "pass", "0")
    assert json.loads(params)["m"] == 6
    assert lines[1].split("\t")[1:4] == ["construct", "error", "2"]


def test_config_flag_is_applied(tmp_path, capsys):
    config = tmp_path / "custom.yml"
    config.write_text("seed: 123\n", encoding="utf-8")
    code, captured = _run(
        capsys, "solve", "bih", "--m", "4", "--ell", "4", "--config", str(config)
    )
    assert code == 0
    assert _json(captured)["seed"] == 123
