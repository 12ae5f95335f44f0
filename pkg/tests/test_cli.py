import json
import subprocess
import sys

import numpy as np
import pytest

from multishift import cli
from multishift import sampling
from multishift import serialization as ser
from multishift.serialization import canonical_dumps


def run_cli(argv):
    return cli.main([str(a) for a in argv])


def read_report(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def report_bytes_without_timing(path):
    data = read_report(path)
    data.pop("timing_seconds", None)
    return canonical_dumps(data)


@pytest.fixture
def swap_problem(tmp_path):
    path = tmp_path / "swap.json"
    code = run_cli([
        "gen", "pochhammer", "--lambda", 1, "--mu", 2, "--lambda2", 2,
        "--mu2", 1, "--N", 16, "--out", path, "--quiet",
    ])
    assert code == 0
    return path


class TestGen:
    def test_pochhammer_ground_truth_field(self, swap_problem):
        data = read_report(swap_problem)
        assert data["ground_truth"]["similar"] is True
        assert data["kind"] == "similarity"

    def test_generated_files_roundtrip_byte_identical(self, swap_problem, tmp_path):
        run_cli(["gen", "unitary-congruence", "--d", 2, "--N", 3, "--n", 2,
                 "--seed", 1, "--out", tmp_path / "uc.json", "--quiet"])
        run_cli(["gen", "perturb", "--base", "pochhammer:1,2", "--N", 6,
                 "--max-degree", 1, "--seed", 2, "--out", tmp_path / "p.json",
                 "--quiet"])
        run_cli(["gen", "homogeneous", "--d", 2, "--N", 4, "--n", 2, "--seed", 3,
                 "--out", tmp_path / "h.json", "--quiet"])
        paths = [swap_problem, tmp_path / "uc.json", tmp_path / "p.json",
                 tmp_path / "h.json"]
        for path in paths:
            text = path.read_text(encoding="utf-8")
            assert canonical_dumps(json.loads(text)) == text, path

    def test_unitary_congruence_sidecar(self, tmp_path):
        out = tmp_path / "uc.json"
        assert run_cli([
            "gen", "unitary-congruence", "--d", 2, "--N", 3, "--n", 2,
            "--seed", 7, "--out", out, "--quiet",
        ]) == 0
        answer = tmp_path / "uc.answer.json"
        assert answer.exists()
        v = ser.matrix_from_json(read_report(answer)["V"], "V")
        assert np.allclose(v.conj().T @ v, np.eye(2), atol=1e-10)
        # the problem file itself must not leak the hidden unitary
        assert "V" not in read_report(out)

    def test_perturb_embeds_certificate(self, tmp_path):
        out = tmp_path / "p.json"
        assert run_cli([
            "gen", "perturb", "--base", "pochhammer:1,2", "--N", 8,
            "--replace0", 4, "--out", out, "--quiet",
        ]) == 0
        gt = read_report(out)["ground_truth"]["closed_form_certificate"]
        assert gt["log_m1"] == pytest.approx(np.log(0.25))
        assert gt["log_m2"] == 0.0

    def test_homogeneous_pair(self, tmp_path):
        out = tmp_path / "h.json"
        assert run_cli([
            "gen", "homogeneous", "--d", 2, "--N", 6, "--n", 2, "--seed", 3,
            "--out", out, "--quiet",
        ]) == 0
        assert run_cli(["run", out, "--quiet"]) == 0
        report = read_report(tmp_path / "h.report.json")
        assert report["verdict"] == "SIMILAR_EVIDENCE"
        assert report["certificate"]["log_ratio"] <= 1e-6


class TestRun:
    def test_swap_similarity(self, swap_problem, tmp_path):
        out = tmp_path / "report.json"
        assert run_cli(["run", swap_problem, "--out", out, "--quiet"]) == 0
        report = read_report(out)
        assert report["verdict"] == "SIMILAR_EVIDENCE"
        c = ser.matrix_from_json(report["certificate"]["C"], "C")
        scale = np.abs(c).max()
        assert abs(c[0, 0]) <= 1e-6 * scale and abs(c[1, 1]) <= 1e-6 * scale
        assert "timing_seconds" in report

    def test_default_report_path(self, swap_problem):
        assert run_cli(["run", swap_problem, "--quiet"]) == 0
        expected = swap_problem.with_name("swap.report.json")
        assert expected.exists()

    def test_identical_explicit_unitary(self, tmp_path):
        ms = sampling.random_moment_system(2, 2, 2, 5)
        problem = {
            "version": 1,
            "kind": "unitary",
            "systems": [ser.moment_system_to_json(ms), ser.moment_system_to_json(ms)],
            "options": {"seed": 0, "tol": 1e-8},
        }
        path = tmp_path / "same.json"
        path.write_text(canonical_dumps(problem), encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 0
        report = read_report(tmp_path / "same.report.json")
        assert report["verdict"] == "YES"
        v = ser.matrix_from_json(report["unitary"]["V"], "V")
        assert np.allclose(v, np.eye(2), atol=1e-6)

    def test_unitary_congruence_recovery(self, tmp_path):
        out = tmp_path / "uc.json"
        run_cli(["gen", "unitary-congruence", "--d", 2, "--N", 3, "--n", 3,
                 "--seed", 11, "--out", out, "--quiet"])
        assert run_cli(["run", out, "--quiet"]) == 0
        report = read_report(tmp_path / "uc.report.json")
        assert report["verdict"] == "YES"
        assert report["unitary"]["residual"] <= 1e-8

    def test_diagnostic_kind(self, tmp_path):
        out = tmp_path / "diag.json"
        run_cli(["gen", "pochhammer", "--lambda", 1, "--mu", 2, "--lambda2", 1,
                 "--mu2", 3, "--kind", "diagnostic", "--degrees", "6,8,10,12",
                 "--out", out, "--quiet"])
        assert run_cli(["run", out, "--quiet"]) == 0
        report = read_report(tmp_path / "diag.report.json")
        assert report["verdict"] == "NOT_SIMILAR_EVIDENCE"
        assert len(report["growth"]["table"]) == 4
        assert report["options"]["degrees"] == [6, 8, 10, 12]

    def test_oracle_kind(self, tmp_path):
        ms = sampling.random_moment_system(2, 2, 2, 40)
        mt = sampling.congruent_pair(ms, np.eye(2) + 0.2j * np.eye(2))
        problem = {
            "version": 1,
            "kind": "oracle",
            "systems": [ser.moment_system_to_json(ms), ser.moment_system_to_json(mt)],
            "options": {"seed": 1},
        }
        path = tmp_path / "oracle.json"
        path.write_text(canonical_dumps(problem), encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 0
        report = read_report(tmp_path / "oracle.report.json")
        assert report["verdict"] == "PASS"
        assert report["oracle"]["invertible_samples"] > 0
        assert report["oracle"]["max_recursion_residual"] <= 1e-9

    def test_explicit_weights_system_in_pairwise_run(self, tmp_path):
        from multishift.numerics import hermpd
        from multishift import shiftcore as sc
        ws = sampling.random_weight_system(2, 3, 2, 30)
        g0 = hermpd(np.eye(2))
        ms = sc.moments_from_weights(ws, g0)
        problem = {
            "version": 1,
            "kind": "similarity",
            "systems": [
                ser.weight_system_to_json(ws, g0),
                ser.moment_system_to_json(ms),
            ],
            "options": {"seed": 0},
        }
        path = tmp_path / "wm.json"
        path.write_text(canonical_dumps(problem), encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 0
        report = read_report(tmp_path / "wm.report.json")
        # the two specs describe the same system, so the certificate is tight
        assert report["verdict"] == "SIMILAR_EVIDENCE"
        assert report["certificate"]["log_ratio"] <= 1e-9

    def test_validate_kind_weights(self, tmp_path):
        ws = sampling.random_weight_system(2, 3, 2, 6)
        from multishift.numerics import hermpd
        problem = {
            "version": 1,
            "kind": "validate",
            "systems": [ser.weight_system_to_json(ws, hermpd(np.eye(2)))],
        }
        path = tmp_path / "val.json"
        path.write_text(canonical_dumps(problem), encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 0
        report = read_report(tmp_path / "val.report.json")
        assert report["verdict"] == "VALID"
        assert report["validation"]["passes"] is True


class TestExitCodes:
    def test_schema_error_names_field(self, tmp_path, capsys):
        problem = {
            "version": 1,
            "kind": "unitary",
            "systems": [
                {"type": "moments", "d": 1, "N": 1, "grams": []},
                {"type": "pochhammer", "lambda": 1, "mu": 2, "d": 1, "N": 1},
            ],
        }
        path = tmp_path / "bad.json"
        path.write_text(canonical_dumps(problem), encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 3
        err = capsys.readouterr().err
        assert "systems[0].fiber_dim" in err

    def test_invalid_json_is_schema_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 3

    def test_input_validation_failure(self, tmp_path):
        # parses fine but the Gram at alpha=0 is indefinite
        bad_gram = {
            "alpha": [0],
            "logscale": 0.0,
            "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]],
        }
        good = {
            "alpha": [1],
            "logscale": 0.0,
            "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
        }
        problem = {
            "version": 1,
            "kind": "similarity",
            "systems": [
                {"type": "moments", "d": 1, "N": 1, "fiber_dim": 2,
                 "grams": [bad_gram, good]},
                {"type": "pochhammer", "lambda": 1, "mu": 2, "d": 1, "N": 1},
            ],
        }
        path = tmp_path / "indef.json"
        path.write_text(canonical_dumps(problem), encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 2

    def test_mismatched_shapes_rejected(self, tmp_path):
        problem = {
            "version": 1,
            "kind": "similarity",
            "systems": [
                {"type": "pochhammer", "lambda": 1, "mu": 2, "d": 1, "N": 4},
                {"type": "pochhammer", "lambda": 1, "mu": 2, "d": 2, "N": 4},
            ],
        }
        path = tmp_path / "mismatch.json"
        path.write_text(canonical_dumps(problem), encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 2

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "v2.json"
        path.write_text('{"version": 2, "kind": "unitary", "systems": []}',
                        encoding="utf-8")
        assert run_cli(["run", path, "--quiet"]) == 3

    def test_validate_subcommand(self, swap_problem, tmp_path):
        assert run_cli(["validate", swap_problem, "--quiet"]) == 0
        path = tmp_path / "broken.json"
        path.write_text('{"version": 1}', encoding="utf-8")
        assert run_cli(["validate", path, "--quiet"]) == 3


class TestDeterminism:
    def test_rerun_is_byte_identical_except_timing(self, swap_problem, tmp_path):
        r1, r2 = tmp_path / "r1.json", tmp_path / "r2.json"
        run_cli(["run", swap_problem, "--out", r1, "--quiet"])
        run_cli(["run", swap_problem, "--out", r2, "--quiet"])
        assert report_bytes_without_timing(r1) == report_bytes_without_timing(r2)

    def test_thread_count_does_not_change_report(self, tmp_path):
        out = tmp_path / "diag.json"
        run_cli(["gen", "pochhammer", "--lambda", 1, "--mu", 3, "--lambda2", 3,
                 "--mu2", 1, "--kind", "diagnostic", "--degrees", "6,8,10,12",
                 "--out", out, "--quiet"])
        r1, r8 = tmp_path / "t1.json", tmp_path / "t8.json"
        run_cli(["run", out, "--threads", 1, "--out", r1, "--quiet"])
        run_cli(["run", out, "--threads", 8, "--out", r8, "--quiet"])
        assert report_bytes_without_timing(r1) == report_bytes_without_timing(r8)

    def test_threads_env_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MULTISHIFT_THREADS", "4")
        assert cli._resolve_threads(None) == 4
        monkeypatch.setenv("MULTISHIFT_THREADS", "junk")
        assert cli._resolve_threads(None) == 1
        monkeypatch.delenv("MULTISHIFT_THREADS")
        assert cli._resolve_threads(None) == 1
        assert cli._resolve_threads(8) == 8


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "multishift", "gen", "pochhammer", "--lambda", "1",
         "--mu", "2", "--lambda2", "2", "--mu2", "1", "--N", "6",
         "--out", str(tmp_path / "cli.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "cli.json").exists()
