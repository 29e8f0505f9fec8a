import json
import os

import numpy as np
import pytest

from qpos.cli import main
from qpos.scenario import ScenarioError, run_scenario_doc, validate_report

SCENARIO = {
    "schema_version": 1,
    "space": {"kind": "monotone", "k": 1},
    "seed": 42,
    "tolerance": 1e-9,
    "grid": {"lower": [-2, -2], "upper": [2, 2], "pitch": 0.1},
    "sets": {
        "A": {"type": "points", "points": [[0, 0], [1, 1]]},
        "bad": {"type": "points", "points": [[0, 1], [1, 0]]},
        "L": {"type": "affine", "x0": [0, 0], "basis": [[1], [1]]},
    },
    "queries": [
        {"op": "is_q_positive", "args": {"A": "A"}, "expect": {"status": "HOLDS"}},
        {"op": "is_q_positive", "args": {"A": "bad"}, "expect": {"status": "FAILS"}},
        {"op": "q_value", "args": {"b": [1, 1]}, "expect": {"value": 1.0}},
        {"op": "phi_conj_eval", "args": {"A": "A", "b": [0.5, 0.5]},
         "expect": {"value": 0.5}},
        {"op": "premax_certify", "args": {"P": "L"},
         "expect": {"classification": "PREMAXIMAL_VIA_202"}},
        {"op": "decompose_sum", "args": {"L": "L", "x": [3, 1]},
         "expect": {"a": [2.0, 2.0], "c": [1.0, -1.0], "tol": 1e-8}},
    ],
}


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestRun:
    def test_green_scenario_exits_zero(self, tmp_path):
        path = write_scenario(tmp_path, SCENARIO)
        out = tmp_path / "report.json"
        assert main(["run", str(path), "-o", str(out)]) == 0
        report = json.loads(out.read_text())
        validate_report(report)
        assert report["summary"]["expectation_mismatches"] == 0

    def test_wrong_expectation_exits_one(self, tmp_path):
        doc = json.loads(json.dumps(SCENARIO))
        doc["queries"] = [{"op": "is_q_positive", "args": {"A": "bad"},
                           "expect": {"status": "HOLDS"}}]
        path = write_scenario(tmp_path, doc)
        out = tmp_path / "report.json"
        assert main(["run", str(path), "-o", str(out)]) == 1
        report = json.loads(out.read_text())
        rec = report["queries"][0]
        assert rec["expect_ok"] is False
        assert rec["result"]["witness"] is not None  # witness pair is carried

    def test_malformed_json_exits_two(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["run", str(path)]) == 2

    def test_unknown_operation_exits_two(self, tmp_path):
        doc = {"schema_version": 1, "queries": [{"op": "asdf", "args": {}}]}
        path = write_scenario(tmp_path, doc)
        assert main(["run", str(path)]) == 2

    def test_unknown_set_reference_rejected_up_front(self, tmp_path):
        doc = {"schema_version": 1, "space": {"kind": "monotone", "k": 1},
               "queries": [{"op": "is_q_positive", "args": {"A": "nope"}}]}
        path = write_scenario(tmp_path, doc)
        assert main(["run", str(path)]) == 2  # schema error, nothing executes

    def test_determinism_bit_for_bit(self, tmp_path):
        path = write_scenario(tmp_path, SCENARIO)
        reports = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            assert main(["run", str(path), "-o", str(out)]) == 0
            rep = json.loads(out.read_text())
            for q in rep["queries"]:
                q.pop("wall_ms")
            reports.append(json.dumps(rep, sort_keys=True))
        assert reports[0] == reports[1]

    def test_threads_env_preserves_order_and_results(self, tmp_path):
        path = write_scenario(tmp_path, SCENARIO)
        out1 = tmp_path / "seq.json"
        main(["run", str(path), "-o", str(out1)])
        os.environ["QPOS_THREADS"] = "4"
        try:
            out2 = tmp_path / "par.json"
            main(["run", str(path), "-o", str(out2)])
        finally:
            del os.environ["QPOS_THREADS"]
        seq = json.loads(out1.read_text())
        par = json.loads(out2.read_text())
        assert [q["op"] for q in seq["queries"]] == [q["op"] for q in par["queries"]]
        for a, b in zip(seq["queries"], par["queries"]):
            assert a["result"] == b["result"]

    def test_csv_payload(self, tmp_path):
        np.savetxt(tmp_path / "pts.csv", np.array([[0.0, 0.0], [1.0, 1.0]]), delimiter=",")
        doc = {"schema_version": 1, "space": {"kind": "monotone", "k": 1},
               "sets": {"A": {"type": "points", "csv": "pts.csv"}},
               "queries": [{"op": "is_q_positive", "args": {"A": "A"},
                            "expect": {"status": "HOLDS"}}]}
        path = write_scenario(tmp_path, doc)
        assert main(["run", str(path), "-o", str(tmp_path / "r.json")]) == 0

    def test_tolerance_override_flag(self, tmp_path):
        doc = {"schema_version": 1, "space": {"kind": "monotone", "k": 1},
               "sets": {"A": {"type": "points", "points": [[0, 0], [1, 0.999999]]}},
               "queries": [{"op": "is_q_positive", "args": {"A": "A"}}]}
        path = write_scenario(tmp_path, doc)
        out = tmp_path / "r.json"
        main(["--tolerance", "1e-3", "run", str(path), "-o", str(out)])
        assert json.loads(out.read_text())["environment"]["tolerance"] == 1e-3


class TestSuiteCommand:
    def test_core_suite_green(self, capsys):
        assert main(["suite", "core", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "[PASS] core.pairing_symmetry_exact" in out

    def test_unknown_suite_exits_two(self):
        assert main(["suite", "nope"]) == 2

    def test_seed_determinism(self, capsys):
        main(["suite", "lipschitz", "--seed", "5"])
        first = capsys.readouterr().out
        main(["suite", "lipschitz", "--seed", "5"])
        second = capsys.readouterr().out
        assert first == second


class TestEvalCommand:
    def test_inline_query(self, capsys):
        code = main(["eval", "pi_member", json.dumps({
            "space": {"kind": "monotone", "k": 1},
            "sets": {"A": {"type": "points", "points": [[0, 0]]}},
            "args": {"A": "A", "b": [1, 1]},
            "expect": {"status": "HOLDS"},
        })])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["result"]["status"] == "HOLDS"

    def test_bad_inline_json(self):
        assert main(["eval", "pi_member", "{oops"]) == 2


class TestReportSchema:
    def test_round_trip_validation(self, tmp_path):
        report = run_scenario_doc(SCENARIO, tmp_path)
        validate_report(report)
        reparsed = json.loads(json.dumps(report))
        validate_report(reparsed)

    def test_bad_reports_rejected(self):
        with pytest.raises(ScenarioError):
            validate_report({"schema_version": 99})
        with pytest.raises(ScenarioError):
            validate_report({"schema_version": 1, "environment": {},
                             "queries": [], "summary": {}})
