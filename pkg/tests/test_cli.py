import csv
import json

import pytest

from pyblanket import BlanketErrno, BlanketError
from pyblanket.cli import ExitCode, main

FAST = ["--restarts", "2", "--opt-iters", "200"]


class TestBlanketCommand:
    def test_missing_source(self):
        assert main(["blanket"]) == ExitCode.USAGE

    def test_identity_example(self, tmp_path):
        out = tmp_path / "report.json"
        code = main(["blanket", "--example", "identity", "--q", "1", "--out", str(out), *FAST])
        assert code == ExitCode.OK
        doc = json.loads(out.read_text())
        assert doc["Q"] == [1]
        assert doc["meta"]["seed"] == 0
        assert len(doc["meta"]["config_hash"]) == 64

    def test_config_file(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"example": "constant", "seed": 3, "q": 1}))
        out = tmp_path / "report.json"
        assert main(["blanket", "--config", str(config), "--out", str(out), *FAST]) == 0
        assert json.loads(out.read_text())["meta"]["seed"] == 3

        assert main([
            "blanket", "--config", str(config), "--seed", "5", "--out", str(out), *FAST,
        ]) == 0
        assert json.loads(out.read_text())["meta"]["seed"] == 5

    def test_missing_config(self, tmp_path):
        assert main(["blanket", "--config", str(tmp_path / "nope.json")]) == ExitCode.USAGE

    def test_state_file(self, tmp_path):
        import pyblanket
        from pyblanket.serialize import dump_state

        path = tmp_path / "ghz.json"
        dump_state(pyblanket.ghz_state(3), path)
        out = tmp_path / "report.json"
        code = main([
            "blanket", "--state", str(path), "--a", "0", "--q", "1",
            "--out", str(out), *FAST,
        ])
        assert code == ExitCode.OK
        assert json.loads(out.read_text())["parameters"]["a"] == [0]

    def test_infeasible_q(self):
        assert main(["blanket", "--example", "ghz", "--q", "5", *FAST]) == ExitCode.USAGE

    def test_bad_flag(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["blanket", "--example", "nonsense"])
        assert exc_info.value.code == 2

    def test_certify(self, tmp_path):
        out = tmp_path / "report.json"
        code = main([
            "blanket", "--example", "identity", "--q", "2", "--certify",
            "--out", str(out), *FAST,
        ])
        assert code == ExitCode.OK
        doc = json.loads(out.read_text())
        assert doc["Q"] == [1]
        assert doc["Q_measured"] == [1]
        cert = doc["certificate"]
        assert cert["passed"] is True
        assert cert["max_distance"] <= cert["theorem_bound"]

    def test_certify_needs_choi_reference(self, tmp_path):
        import pyblanket
        from pyblanket.serialize import dump_state

        path = tmp_path / "ghz.json"
        dump_state(pyblanket.ghz_state(3), path)
        code = main(["blanket", "--state", str(path), "--a", "1", "--certify", *FAST])
        assert code == ExitCode.USAGE

    def test_region_out_of_range(self, tmp_path):
        import pyblanket
        from pyblanket.serialize import dump_state

        path = tmp_path / "ghz.json"
        dump_state(pyblanket.ghz_state(3), path)
        assert main(["blanket", "--state", str(path), "--a", "7", *FAST]) == ExitCode.USAGE

    def test_non_hermitian_state_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "dims": [2], "rho_real": [[0.5, 1.0], [0.0, 0.5]],
        }))
        assert main(["blanket", "--state", str(path), "--a", "0", *FAST]) == ExitCode.USAGE

    def test_numerical_failure(self, monkeypatch):
        def failing(*args, **kwargs):
            raise BlanketError(BlanketErrno.POVM_INCOMPLETE, "injected")

        monkeypatch.setattr("pyblanket.cli.greedy_blanket", failing)
        code = main(["blanket", "--example", "identity", "--q", "1", *FAST])
        assert code == ExitCode.INVARIANT


class TestSpinchainCommand:
    def test_sweep(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main([
            "spinchain", "--n", "3", "--tmax", "0.5", "--steps", "2", "--q", "1..3",
            "--out", str(out), *FAST,
        ])
        assert code == ExitCode.OK
        with open(out, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["t", "q", "alpha_q_bits", "bound_bits", "Q_indices", "runtime_s"]
        assert len(rows) == 7
        meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
        assert len(meta["errors"]) == 2
        assert meta["config"]["params"]["q"] == "1..3"

    def test_bad_q(self):
        assert main(["spinchain", "--q", "one..two"]) == ExitCode.USAGE

    def test_q_list_from_config(self, tmp_path):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"n": 3, "tmax": 0.5, "steps": 1, "q": [1, 2]}))
        out = tmp_path / "sweep.csv"
        code = main(["spinchain", "--config", str(config), "--out", str(out), *FAST])
        assert code == ExitCode.OK
        with open(out, newline="") as f:
            rows = list(csv.reader(f))
        assert [row[1] for row in rows[1:]] == ["1", "2"]


class TestVerifyCommand:
    def test_chain(self, capsys):
        assert main(["verify", "chain"]) == ExitCode.OK
        out = capsys.readouterr().out
        assert out.startswith("PASS chain/residual")

    def test_appendixb(self, tmp_path):
        out = tmp_path / "appendixb.json"
        assert main(["appendixb", "--grid", "81", "--out", str(out)]) == ExitCode.OK
        doc = json.loads(out.read_text())
        assert doc["passed"] is True
        assert "config_hash" in doc["meta"]
