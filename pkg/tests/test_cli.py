import csv
import io
import json

import pytest

from taulab.cli import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, RunConfig, main, make_config
from taulab.conditions import CoefficientArray
from taulab.looprestrict import QCoefficients


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestGen:
    def test_deterministic_bytes(self, capsys):
        _, a, _ = run(capsys, "gen", "--n", "2", "--seed", "5")
        _, b, _ = run(capsys, "gen", "--n", "2", "--seed", "5")
        _, c, _ = run(capsys, "gen", "--n", "2", "--seed", "6")
        assert a == b and a != c
        assert CoefficientArray.from_json(a).to_json() == a

    def test_three_components(self, capsys):
        code, out, _ = run(capsys, "gen", "--n", "3", "--seed", "1")
        assert code == EXIT_PASS
        arr = CoefficientArray.from_json(out)
        assert set(arr.blocks) == {(1, 0), (2, 0), (2, 1)}

    def test_loop_data_is_anti_diagonal(self, capsys, tmp_path):
        path = tmp_path / "q.json"
        assert main(["gen", "--n", "2", "--seed", "3", "--loop", "--out", str(path)]) == EXIT_PASS
        q = QCoefficients.from_json(path.read_text())
        assert q.n == 2

    def test_box_and_origin(self, capsys):
        _, out, _ = run(capsys, "gen", "--n", "2", "--seed", "2", "--box", "2x3", "--origin=-1,-1")
        box = CoefficientArray.from_json(out).support_box((1, 0))
        assert box is not None and box[0] >= -1 and box[1] <= 0 and box[2] >= -1 and box[3] <= 1

    def test_bad_box(self, capsys):
        code, _, err = run(capsys, "gen", "--box", "three")
        assert code == EXIT_INPUT and "box" in err


class TestTau:
    def test_n2_three_methods(self, capsys):
        code, out, _ = run(capsys, "tau", "--n", "2", "--seed", "7", "--grid", "2")
        assert code == EXIT_PASS
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0][:3] == ["k", "l", "alpha"]
        assert {r[5] for r in rows[1:]} == {"hankel", "minor", "fock"}

    def test_n3_residue_minor(self, capsys):
        code, out, _ = run(capsys, "tau", "--n", "3", "--seed", "2", "--grid", "1", "--methods", "residue,minor")
        assert code == EXIT_PASS
        assert {r[5] for r in list(csv.reader(io.StringIO(out)))[1:]} == {"residue", "minor"}

    def test_out_writes_csv_and_json(self, tmp_path, capsys):
        base = tmp_path / "table"
        assert main(["tau", "--n", "2", "--seed", "1", "--grid", "1", "--out", str(base)]) == EXIT_PASS
        obj = json.loads((tmp_path / "table.json").read_text())
        assert obj["n"] == 2 and obj["rows"]
        assert (tmp_path / "table.csv").read_text().startswith("k,l,alpha")

    def test_loop_input(self, tmp_path, capsys):
        path = tmp_path / "q.json"
        main(["gen", "--n", "2", "--seed", "4", "--loop", "--out", str(path)])
        code, out, _ = run(capsys, "tau", "--input", str(path), "--grid", "2", "--methods", "minor,hankel")
        assert code == EXIT_PASS and "hankel" in out

    def test_corrupted_input(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 2, "blocks": {"1,0": [[0, 0, "x"]]}}')
        code, _, err = run(capsys, "tau", "--input", str(path))
        assert code == EXIT_INPUT and err

    def test_not_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        assert run(capsys, "tau", "--input", str(path))[0] == EXIT_INPUT

    def test_missing_file(self, tmp_path, capsys):
        assert run(capsys, "tau", "--input", str(tmp_path / "absent.json"))[0] == EXIT_INPUT

    def test_unknown_method(self, capsys):
        assert run(capsys, "tau", "--n", "2", "--methods", "guess")[0] == EXIT_INPUT

    def test_wrong_method_for_n(self, capsys):
        assert run(capsys, "tau", "--n", "3", "--methods", "hankel", "--grid", "1")[0] != EXIT_PASS


class TestCheck:
    def test_all_n2(self, capsys):
        code, out, _ = run(capsys, "check", "all", "--n", "2", "--seed", "7", "--grid", "2")
        assert code == EXIT_PASS
        for system in ("2T", "2Q-loop", "2T->2Q", "hdiff-2", "nonneg", "conj-gln", "conj-glinf"):
            assert any(line.startswith(system + ":") for line in out.splitlines()), system

    def test_3T(self, capsys):
        code, out, _ = run(capsys, "check", "3T", "--n", "3", "--seed", "3", "--grid", "2", "--origin=-1,-1")
        assert code == EXIT_PASS
        assert "3T-three-term: pass" in out and "3T-four-term: pass" in out

    def test_3Q_reports_candidate(self, capsys):
        code, out, _ = run(capsys, "check", "--suite", "3Q", "--n", "3", "--seed", "1", "--grid", "1")
        assert code == EXIT_PASS
        assert "reported" in out

    def test_glinf_n4_reported(self, capsys):
        code, out, _ = run(capsys, "check", "conj-glinf", "--n", "4", "--seed", "0", "--grid", "1", "--shifts", "0")
        assert code == EXIT_PASS and "conj-glinf: reported" in out

    def test_suite_needs_matching_n(self, capsys):
        assert run(capsys, "check", "2T", "--n", "3")[0] == EXIT_INPUT

    def test_unknown_suite(self, capsys):
        assert run(capsys, "check", "5T", "--n", "2")[0] == EXIT_INPUT

    def test_report_file(self, tmp_path, capsys):
        path = tmp_path / "rep.json"
        code, _, _ = run(capsys, "check", "2T", "--n", "2", "--seed", "1", "--grid", "1", "--out", str(path))
        assert code == EXIT_PASS
        reports = json.loads(path.read_text())["reports"]
        assert reports[0]["verdict"] == "pass" and reports[0]["residuals"]

    def test_failure_exit_code(self, tmp_path, capsys, monkeypatch):
        from taulab import relations

        def broken(tau, grid, seed=None):
            rep = relations.RelationReport("2T", seed)
            rep.add({}, "2T", 1)
            return rep

        monkeypatch.setattr(relations, "check_2T", broken)
        assert run(capsys, "check", "2T", "--n", "2")[0] == EXIT_FAIL

    def test_jobs_match_serial(self, capsys):
        _, serial, _ = run(capsys, "check", "nonneg,hdiff", "--n", "2", "--seed", "2", "--grid", "1")
        _, parallel, _ = run(capsys, "check", "nonneg,hdiff", "--n", "2", "--seed", "2", "--grid", "1", "--jobs", "2")
        assert serial == parallel


class TestConfig:
    def test_defaults(self):
        cfg = make_config(["check"])
        assert cfg == RunConfig(command="check")

    def test_precedence(self, tmp_path, monkeypatch):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seed": 11, "n": 3, "jobs": 4}))
        monkeypatch.setenv("TAULAB_JOBS", "2")
        cfg = make_config(["check", "--config", str(path), "--seed", "12"])
        assert (cfg.seed, cfg.n, cfg.jobs) == (12, 3, 4)

    def test_env_jobs(self, monkeypatch):
        monkeypatch.setenv("TAULAB_JOBS", "3")
        assert make_config(["check"]).jobs == 3

    def test_bad_env_jobs(self, monkeypatch, capsys):
        monkeypatch.setenv("TAULAB_JOBS", "many")
        assert run(capsys, "check")[0] == EXIT_INPUT

    def test_unknown_config_key(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text('{"colour": "red"}')
        assert run(capsys, "check", "--config", str(path))[0] == EXIT_INPUT

    def test_usage_error(self, capsys):
        assert run(capsys, "frobnicate")[0] == EXIT_INPUT


class TestFactor:
    def test_gauss_factor(self, capsys):
        code, out, _ = run(capsys, "factor", "--n", "2", "--seed", "3", "--k", "1", "--shift", "0,0")
        assert code == EXIT_PASS
        obj = json.loads(out)
        assert obj["k"] == [1] and "tau" in obj
        if obj["factorization"] is not None:
            assert obj["factorization"]["x"]

    def test_loop_factor(self, tmp_path, capsys):
        path = tmp_path / "q.json"
        main(["gen", "--n", "2", "--seed", "4", "--loop", "--out", str(path)])
        code, out, _ = run(capsys, "factor", "--input", str(path), "--k", "1", "--shift", "0,0")
        assert code == EXIT_PASS
        fac = json.loads(out)["factorization"]
        assert fac is None or set(fac) == {"g_minus", "g_plus"}

    def test_bad_vector_length(self, capsys):
        assert run(capsys, "factor", "--n", "3", "--k", "1")[0] == EXIT_INPUT
