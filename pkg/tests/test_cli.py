import json

import pytest

from hdsector import example_spec, fixtures, reduce
from hdsector.algebra import (
    PHASE,
    GSeries,
    IdentityCheck,
    jet_from_json,
    phase_to_json,
    q,
    series_from_json,
)
from hdsector.cli import main, run
from hdsector.config import REPORT_DIR_ENV, load_config


@pytest.fixture(autouse=True)
def no_report_dir(monkeypatch):
    monkeypatch.delenv(REPORT_DIR_ENV, raising=False)


def run_json(capsys, *argv):
    code = main([*argv, "--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_solve_f(capsys):
    code, report = run_json(capsys, "solve-f", "--order", "3")
    assert code == 0
    assert report["passed"]
    f = report["stages"]["solve-f"]["f"]
    for n, terms in enumerate(fixtures.F_TERMS):
        assert f[n] == phase_to_json(fixtures.poly(terms))


def test_reduce_text(capsys):
    assert main(["reduce", "--order", "1"]) == 0
    out = capsys.readouterr().out
    assert "[reduce]" in out
    assert "-w^4*q^3 - 4*w^2*q*qdot^2" in out
    assert out.rstrip().endswith("PASS")


def test_darboux_beta(capsys):
    code, report = run_json(
        capsys, "darboux", "--order", "2", "--gauge", "beta=-1/2"
    )
    assert code == 0
    assert report["stages"]["darboux"]["gauge"] == "beta=-1/2"


def test_spectrum_beta(capsys):
    code, report = run_json(
        capsys, "spectrum", "--beta", "-1", "--levels", "3"
    )
    assert code == 0
    levels = report["stages"]["spectrum"]["levels"]
    assert levels[0]["correction"] == [
        {"omegaPow": 4, "coeff": "25/8"}
    ]
    assert abs(levels[0]["rs"] - 0.5003125) < 10**-12


def test_config_error(capsys):
    argv = ["darboux", "--monomial", "2,0,2", "--gauge", "parity"]
    code = main(argv)
    assert code == 2
    assert "Invalid configuration" in capsys.readouterr().err


def test_bad_monomial(capsys):
    assert main(["solve-f", "--monomial", "q"]) == 2


def test_stage_error_is_reported(capsys):
    code, report = run_json(capsys, "spectrum", "--order", "1")
    assert code == 2
    assert not report["passed"]
    (error,) = report["errors"]
    assert error["stage"] == "spectrum"
    assert error["inputs"]["order"] == 1
    assert "darboux" in report["stages"]


def test_reports_are_reproducible(tmp_path, capsys):
    for name in ["a", "b"]:
        directory = tmp_path / name
        argv = ["reduce", "--order", "2"]
        argv += ["--output-dir", str(directory)]
        assert main(argv) == 0
    for suffix in ["json", "txt"]:
        a = (tmp_path / "a" / f"reduce.{suffix}").read_bytes()
        b = (tmp_path / "b" / f"reduce.{suffix}").read_bytes()
        assert a == b


def test_run_records_checks():
    config = load_config(overrides={"model": {"order": 2}})
    report = run(config, "darboux")
    names = {c["name"] for c in report.checks}
    assert {"euler-lagrange", "symplectic pullback"} <= names
    assert report.exit_code() == 0


@pytest.mark.slow
def test_reproduce_paper(capsys):
    code, report = run_json(capsys, "reproduce-paper")
    failed = [c for c in report["checks"] if not c["passed"]]
    assert failed == []
    assert code == 0


def test_failed_check_keeps_results(capsys, monkeypatch):
    def failing(darboux_map, sector, normal_form):
        residual = GSeries.of([PHASE.zero, q], darboux_map.order)
        return [IdentityCheck("symplectic pullback", residual)]

    monkeypatch.setattr("hdsector.darboux.map_checks", failing)
    code, report = run_json(capsys, "darboux", "--order", "2")
    assert code == 1
    assert report["errors"] == []
    assert report["stages"]["darboux"]["vTable"]
    (check,) = [c for c in report["checks"] if not c["passed"]]
    assert check["name"] == "symplectic pullback"
    assert check["order"] == 1


def test_unexpected_error(capsys, monkeypatch):
    def broken(spec):
        raise RuntimeError("broken solver")

    monkeypatch.setattr("hdsector.cli.solve_constraint", broken)
    code, report = run_json(capsys, "solve-f")
    assert code == 2
    assert report["errors"][0]["type"] == "RuntimeError"


def test_darboux_quintic_potential(capsys):
    code, report = run_json(
        capsys, "darboux", "--monomial", "3,0,2", "--order", "3"
    )
    assert report["errors"] == []
    assert code in (0, 1)
    names = {c["name"] for c in report["checks"] if not c["passed"]}
    assert not names & {"symplectic pullback", "homogeneity"}


def test_tables_parse_back(capsys):
    spec = example_spec(2)
    code, report = run_json(capsys, "reduce", "--order", "2")
    assert code == 0
    stage = report["stages"]["reduce"]
    sector = reduce(spec)
    assert series_from_json(stage["hRed"]) == sector.hamiltonian
    omega_factor = series_from_json(stage["omegaFactor"])
    assert omega_factor == sector.omega_factor
    f = series_from_json(report["stages"]["solve-f"]["f"])
    assert f == sector.f.series


def test_error_inputs_parse_back(capsys):
    _, report = run_json(capsys, "spectrum", "--order", "1")
    inputs = report["errors"][0]["inputs"]
    potential = jet_from_json(inputs["potential"])
    assert potential == example_spec().potential.terms
