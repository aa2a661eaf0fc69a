import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from trispin import __version__
from trispin.config import RunConfig, load_config_file, resolve_config
from trispin.reports import CSV_COLUMNS, Report, scan_csv, to_jsonable


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig(command="ontic")
        assert (cfg.a, cfg.b, cfg.c) == (1.0, 2.0, 7.0)
        assert cfg.q == 0.5
        assert cfg.seed == 0
        assert cfg.output == "json"

    @pytest.mark.parametrize("field, value", [
        ("theta", math.pi / 2),
        ("theta", 0.0),
        ("q", 0.0),
        ("q", 1.5),
        ("samples", 0),
        ("seed", -1),
        ("output", "xml"),
        ("a", float("inf")),
    ])
    def test_invalid_values(self, field, value):
        with pytest.raises(ValidationError):
            RunConfig(command="x", **{field: value})

    def test_unknown_fields_rejected(self):
        with pytest.raises(ValidationError):
            RunConfig(command="x", temperature=3)


class TestConfigFiles:
    def test_key_value_file(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("# overlap run\nq=0.25\nsamples=500\nseed=11\n")
        cfg = resolve_config("ontic", str(path), {})
        assert cfg.q == 0.25
        assert cfg.samples == 500
        assert cfg.seed == 11

    def test_json_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"a": 1, "b": 2, "c": 3}))
        cfg = resolve_config("hamiltonian", str(path), {})
        assert (cfg.a, cfg.b, cfg.c) == (1.0, 2.0, 3.0)

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("q=0.25\nseed=11\n")
        cfg = resolve_config("ontic", str(path), {"q": 0.75, "seed": None})
        assert cfg.q == 0.75
        assert cfg.seed == 11

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("colour=blue\n")
        with pytest.raises(ValueError, match="unknown config keys"):
            load_config_file(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValueError, match="not found"):
            load_config_file(str(tmp_path / "nope.env"))

    def test_json_must_be_an_object(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValueError, match="JSON object"):
            load_config_file(str(path))

    def test_invalid_value_in_file(self, tmp_path):
        path = tmp_path / "run.env"
        path.write_text("q=0\n")
        with pytest.raises(ValidationError):
            resolve_config("ontic", str(path), {})


class TestReports:
    def test_header_fields(self):
        data = json.loads(Report(command="pbr2").dumps())
        assert data["schema_version"] == "1"
        assert data["version"] == __version__
        assert list(data)[:4] == ["schema_version", "tool", "version", "command"]
        assert data["passed"] is True

    def test_round_trip_is_byte_identical(self):
        report = Report(
            command="exclusion",
            parameters={"theta": math.pi / 3},
            result={"table": np.array([[0.1 + 0.2, 1 / 3], [2 / 3, 1e-300]]), "count": np.int64(4)},
            verdicts={"ok": True, "other": False},
        )
        text = report.dumps()
        assert json.dumps(json.loads(text), indent=2, allow_nan=False) + "\n" == text
        assert json.loads(text)["passed"] is False

    def test_floats_keep_full_precision(self):
        text = Report(command="x", result={"v": 0.1 + 0.2}).dumps()
        assert "0.30000000000000004" in text

    def test_complex_values_become_pairs(self):
        assert to_jsonable(np.complex128(1 - 2j)) == [1.0, -2.0]

    def test_non_finite_values_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            Report(command="x", result={"v": float("nan")}).dumps()

    def test_scan_csv(self):
        tables = [np.full((8, 8), 1 / 8), np.full((8, 8), 1 / 8)]
        lines = scan_csv([0.5, 0.75], tables).splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 1 + 2 * 64
        assert lines[1] == "0.5,1,1,0.125"
        assert lines[-1] == "0.75,8,8,0.125"
