import json

import numpy as np

from app.errors import EXIT_CHECK_FAILED, EXIT_OK
from app.services.report_service import RunReport, emit_csv, write_csv, write_json


class TestRunReport:
    def test_exit_code_follows_verdicts(self):
        report = RunReport(command="x")
        report.add_verdict("a", True)
        assert report.exit_code == EXIT_OK
        report.add_verdict("b", False, cmi_bits=0.3)
        assert report.exit_code == EXIT_CHECK_FAILED

    def test_forced_exit_wins(self):
        report = RunReport(command="x", forced_exit=3)
        report.add_verdict("a", True)
        assert report.exit_code == 3

    def test_json_is_plain_and_sorted(self):
        report = RunReport(command="x", inputs={"b": np.float64(0.5), "a": (1, 2)})
        report.result["inf"] = float("inf")
        report.add_verdict("ok", np.bool_(True), value=np.int64(7))
        record = json.loads(report.to_json())
        assert record["inputs"] == {"a": [1, 2], "b": 0.5}
        assert record["result"]["inf"] == "inf"
        assert record["verdicts"] == [{"name": "ok", "pass": True, "evidence": {"value": 7}}]
        assert list(record) == sorted(record)

    def test_same_report_same_bytes(self):
        def build():
            report = RunReport(command="x", inputs={"seed": 1})
            report.add_verdict("v", True, cmi_bits=1e-12)
            return report.to_json()

        assert build() == build()


class TestFiles:
    def test_csv_format(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", [{"D": 0.1, "R_bits": 0.5, "converged": True}], ["D", "R_bits", "converged"])
        assert path.read_bytes() == b"D,R_bits,converged\n0.1,0.5,true\n"

    def test_csv_columns_from_first_row(self, tmp_path):
        path = write_csv(tmp_path / "t.csv", [{"a": 1, "b": False}])
        assert path.read_text(encoding="utf-8").splitlines() == ["a,b", "1,false"]

    def test_json_ends_with_newline(self, tmp_path):
        path = write_json(tmp_path / "sub" / "r.json", {"b": 1, "a": np.float32(0.5)})
        text = path.read_text(encoding="utf-8")
        assert text.endswith("}\n")
        assert json.loads(text) == {"a": 0.5, "b": 1}

    def test_emit_only_with_out(self, tmp_path):
        report = RunReport(command="x")
        emit_csv(report, None, "t.csv", [{"a": 1}])
        assert report.artifacts == []
        emit_csv(report, str(tmp_path), "t.csv", [{"a": 1}])
        assert report.artifacts == [str(tmp_path / "t.csv")]
