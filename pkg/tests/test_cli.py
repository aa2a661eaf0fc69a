import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from trispin import __version__, hamiltonian
from trispin.cli import main
from trispin.linalg_core import OperatorMatrix
from trispin.ontic_models import build_overlap_toy_model

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, ["--log-level", "WARNING", *args])


def report_of(result):
    return json.loads(result.stdout)


class TestHamiltonianCommand:
    def test_reference_point_refutes_builder(self, runner):
        result = invoke(runner, "hamiltonian", "--a", "1", "--b", "2", "--c", "7")
        assert result.exit_code == 1
        report = report_of(result)
        assert report["verdicts"] == {"builder_matches_matrix": False, "kets_are_eigenvectors": True}
        assert report["result"]["spectrum"]["numeric"] == pytest.approx([-24, -16, -12, -4, 8, 12, 16, 20], abs=1e-9)
        assert report["result"]["spectrum"]["misprinted_labels"] == [4]
        assert report["result"]["degeneracy"]["printed_forms"] == []
        assert report["result"]["explicit_matrix"][0][0] == 4.0

    def test_collision_at_123(self, runner):
        result = invoke(runner, "hamiltonian", "--a", "1", "--b", "2", "--c", "3")
        report = report_of(result)
        printed = report["result"]["degeneracy"]["printed_forms"]
        assert {"pair": [1, 4], "form": "a + b - c"} in printed
        assert report["result"]["degeneracy"]["true_spectrum"] == [{"pair": [2, 6], "form": "3a - c"}]
        assert "collisions" in result.stderr

    def test_origin_is_all_degenerate_and_passes(self, runner):
        result = invoke(runner, "hamiltonian", "--a", "0", "--b", "0", "--c", "0")
        assert result.exit_code == 0
        report = report_of(result)
        assert report["result"]["builder"]["residual"] == 0.0
        assert len(report["result"]["degeneracy"]["printed_forms"]) == 28

    def test_malformed_parameter(self, runner):
        assert invoke(runner, "hamiltonian", "--a", "one").exit_code == 2

    def test_non_finite_parameter(self, runner):
        assert invoke(runner, "hamiltonian", "--a", "nan").exit_code == 2

    def test_csv_not_supported(self, runner):
        assert invoke(runner, "hamiltonian", "--output", "csv").exit_code == 2


class TestExclusionCommand:
    def test_single_theta(self, runner):
        result = invoke(runner, "exclusion", "--theta", "1.0471975511965976")
        assert result.exit_code == 0
        report = report_of(result)
        point = report["result"]["points"][0]
        assert point["matching"]["e2"] == 6
        assert point["identity_pairing_first_failure"]["index"] == 2
        assert point["identity_pairing_first_failure"]["probability"] == pytest.approx(3 / 64, abs=1e-12)

    def test_grid_is_stable(self, runner):
        result = invoke(runner, "exclusion", "--grid", "99", "--workers", "4")
        assert result.exit_code == 0
        report = report_of(result)
        assert report["result"]["permutation"] == [1, 6, 5, 2, 3, 8, 4, 7]
        assert report["parameters"]["points"] == 99
        assert report["verdicts"]["theta_stable"] is True

    @pytest.mark.parametrize("theta", ["1.5707963267948966", "0", "-1"])
    def test_theta_out_of_range(self, runner, theta):
        assert invoke(runner, "exclusion", "--theta", theta).exit_code == 2

    def test_theta_and_grid_exclusive(self, runner):
        assert invoke(runner, "exclusion", "--theta", "0.5", "--grid", "3").exit_code == 2

    def test_csv_output(self, runner, tmp_path):
        out = tmp_path / "scan.csv"
        result = invoke(runner, "exclusion", "--grid", "5", "--output", "csv", "--out", str(out))
        assert result.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "theta,prep_index,outcome_index,probability"
        assert len(lines) == 1 + 5 * 64


class TestPbr2Command:
    def test_unwritable_out_path_is_invalid_input(self, runner, tmp_path):
        result = invoke(runner, "pbr2", "--out", str(tmp_path / "missing" / "report.json"))
        assert result.exit_code == 2
        assert "File error" in result.stderr

    def test_four_zeros(self, runner):
        result = invoke(runner, "pbr2")
        assert result.exit_code == 0
        report = report_of(result)
        table = report["result"]["probability_table"]
        assert table[0][0] == 0.0
        assert table[0][3] == pytest.approx(0.5, abs=1e-12)
        assert all(abs(sum(row) - 1) <= 1e-12 for row in table)
        assert report["result"]["matching"] == {"xi1": 1, "xi2": 2, "xi3": 3, "xi4": 4}


class TestOnticCommand:
    def test_bound_and_determinism(self, runner):
        args = ("ontic", "--q", "0.5", "--samples", "20000", "--seed", "7")
        first = invoke(runner, *args)
        second = invoke(runner, *args)
        assert first.exit_code == 0
        assert first.stdout == second.stdout
        report = report_of(first)
        assert report["result"]["forbidden_outcome_bound"] >= 0.015625
        assert report["result"]["pigeonhole_floor"] == 0.015625
        assert report["result"]["psi_ontic"]["consistency"]["passed"] is True
        assert report["result"]["model_consistency"]["passed"] is False

    def test_seed_changes_sampling(self, runner):
        first = report_of(invoke(runner, "ontic", "--samples", "5000", "--seed", "1"))
        second = report_of(invoke(runner, "ontic", "--samples", "5000", "--seed", "2"))
        assert first["result"]["monte_carlo"] != second["result"]["monte_carlo"]

    @pytest.mark.parametrize("q", ["0", "1.5"])
    def test_q_out_of_range(self, runner, q):
        assert invoke(runner, "ontic", "--q", q).exit_code == 2

    def test_model_file(self, runner, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps(build_overlap_toy_model(0.25).to_dict()))
        result = invoke(runner, "ontic", "--model", str(path), "--samples", "5000")
        assert result.exit_code == 0
        report = report_of(result)
        assert report["result"]["pigeonhole_floor"] == pytest.approx(0.25 ** 3 / 8)
        assert report["parameters"]["model_file"] == str(path)

    def test_malformed_model_file(self, runner, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"parties": []}')
        assert invoke(runner, "ontic", "--model", str(path)).exit_code == 2

    def test_config_file_with_override(self, runner, tmp_path):
        path = tmp_path / "ontic.env"
        path.write_text("q=0.25\nsamples=4000\nseed=3\n")
        report = report_of(invoke(runner, "ontic", "--config", str(path), "--q", "1.0"))
        assert report["parameters"]["q"] == 1.0
        assert report["parameters"]["samples"] == 4000
        assert report["parameters"]["seed"] == 3


class TestAllChecks:
    def test_every_claim_reproduces(self, runner, tmp_path):
        out = tmp_path / "checks.json"
        result = invoke(runner, "all-checks", "--out", str(out))
        assert result.exit_code == 0, result.stderr
        report = json.loads(out.read_text())
        statuses = {c["id"]: c["observed"] for c in report["result"]["claims"]}
        assert statuses["builder_matches_matrix"] == "refuted"
        assert statuses["printed_eigenvalues"] == "refuted"
        assert statuses["exclusion_matching"] == "holds"
        assert all(report["verdicts"].values())

    def test_corrupted_matrix_entry_flips_exit_code(self, runner, monkeypatch):
        hamiltonian.calibrate_builder()
        original = hamiltonian.explicit_matrix

        def corrupted(a, b, c):
            entries = np.array(original(a, b, c).entries)
            entries[0, 0] += 1e-6
            return OperatorMatrix.hermitian(entries)

        monkeypatch.setattr(hamiltonian, "explicit_matrix", corrupted)
        result = invoke(runner, "all-checks")
        assert result.exit_code == 1
        verdicts = report_of(result)["verdicts"]
        assert verdicts["kets_are_eigenvectors"] is False
        assert verdicts["exclusion_matching"] is True

    def test_single_claim(self, runner):
        result = invoke(runner, "all-checks", "--claim", "pbr_two_qubit")
        assert result.exit_code == 0
        assert list(report_of(result)["verdicts"]) == ["pbr_two_qubit"]


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.stdout


def test_unknown_command(runner):
    assert invoke(runner, "nonsense").exit_code == 2


def test_module_entry_point_keeps_stdout_clean():
    completed = subprocess.run(
        [sys.executable, "-m", "trispin", "pbr2"],
        cwd=REPO_ROOT,
        capture_output=True,
        text=True,
    )
    assert completed.returncode == 0
    assert json.loads(completed.stdout)["command"] == "pbr2"
    assert "INFO" in completed.stderr
