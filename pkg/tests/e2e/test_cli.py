import csv
import json

import numpy as np
import pytest

from app.cli import main, parse_points, parse_times
from app.config.settings import settings
from app.core.errors import ProblemDefinitionError


def problem_path(problems_dir, name):
    return str(problems_dir / f"{name}.json")


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


# ===== classical =====

def test_classical_writes_artifacts(problems_dir, tmp_path):
    code = main(["classical", "--problem", problem_path(problems_dir, "harmonic"),
                 "--t", "0.2,0.1i", "--out", str(tmp_path)])
    assert code == 0
    report = read_json(tmp_path / "classical_report.json")
    assert report["passed"]
    assert len(report["records"]) == 2
    with (tmp_path / "action.csv").open(encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    assert rows[0][:4] == ["t_re", "t_im", "x", "y"]
    assert rows[0][8:12] == ["gamma_re", "gamma_im", "theta_re", "theta_im"]
    # B = 0: γ = Tr(AB) se anula
    assert all(float(row[8]) == 0.0 and float(row[9]) == 0.0 for row in rows[1:])
    assert all(np.isfinite(float(v)) for row in rows[1:] for v in row[10:12])
    assert 1.0 <= report["max_conditioning"] < settings.focal_warning_limit
    assert not report["near_focal"]
    assert len(rows) == 3
    with (tmp_path / "trajectories.csv").open(encoding="utf-8") as handle:
        assert sum(1 for _ in handle) == 1 + 2 * 21


def test_classical_output_is_deterministic(problems_dir, tmp_path):
    args = ["classical", "--problem", problem_path(problems_dir, "magnetic"), "--t", "0.15,0.1+0.1i"]
    assert main(args + ["--out", str(tmp_path / "first")]) == 0
    assert main(args + ["--out", str(tmp_path / "second")]) == 0
    for name in ("trajectories.csv", "action.csv", "classical_report.json"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


# ===== kernel =====

def test_kernel_with_cosine_potential(problems_dir, tmp_path):
    code = main(["kernel", "--problem", problem_path(problems_dir, "cos_potential"), "--t", "0.1",
                 "--xy", "0.3|-0.2;0|0", "--nmax", "3", "--quad", "8", "--out", str(tmp_path)])
    assert code == 0
    records = read_json(tmp_path / "kernel_records.json")["records"]
    assert len(records) == 2
    assert all(r["orders_used"] == 3 for r in records)
    assert (tmp_path / "series_terms.csv").exists()
    assert (tmp_path / "deformation_grid.csv").exists()


def test_kernel_constant_potential_skips_grid(problems_dir, tmp_path):
    code = main(["kernel", "--problem", problem_path(problems_dir, "constant_potential"),
                 "--t", "0.3", "--nmax", "12", "--out", str(tmp_path)])
    assert code == 0
    [record] = read_json(tmp_path / "kernel_records.json")["records"]
    assert record["pconj"][0][0]["re"] == pytest.approx(np.exp(0.3), rel=1e-10)
    assert not (tmp_path / "deformation_grid.csv").exists()


# ===== códigos de salida =====

def test_missing_problem_is_configuration_error(tmp_path):
    code = main(["kernel", "--problem", str(tmp_path / "missing.json"), "--out", str(tmp_path)])
    assert code == 2
    error = read_json(tmp_path / "error.json")
    assert error["error"] == "ProblemDefinitionError"
    assert error["exit_code"] == 2


def test_negative_order_is_configuration_error(problems_dir, tmp_path):
    code = main(["kernel", "--problem", problem_path(problems_dir, "free"), "--nmax", "-1", "--out", str(tmp_path)])
    assert code == 2


def test_kernel_at_zero_time(problems_dir, tmp_path):
    code = main(["kernel", "--problem", problem_path(problems_dir, "cos_potential"), "--t", "0",
                 "--out", str(tmp_path)])
    assert code == 3
    assert read_json(tmp_path / "error.json")["error"] == "UndefinedAtZeroError"


def test_time_outside_radius(problems_dir, tmp_path):
    code = main(["classical", "--problem", problem_path(problems_dir, "free"), "--t", "1.5",
                 "--out", str(tmp_path)])
    assert code == 3
    assert read_json(tmp_path / "error.json")["error"] == "OutOfRadiusError"


def test_focal_point_exit_code(problems_dir, tmp_path, monkeypatch, fresh_caches):
    monkeypatch.setattr(settings, "focal_condition_limit", 10.0)
    code = main(["classical", "--problem", problem_path(problems_dir, "harmonic_stiff"), "--t", "0.521i",
                 "--out", str(tmp_path)])
    assert code == 3
    error = read_json(tmp_path / "error.json")
    assert error["error"] == "FocalPointError"
    assert float(error["context"]["conditioning"]) > 10.0


def test_conditioning_reported_near_focal_point(problems_dir, tmp_path, monkeypatch, fresh_caches):
    monkeypatch.setattr(settings, "focal_warning_limit", 1.0)
    code = main(["classical", "--problem", problem_path(problems_dir, "harmonic_stiff"), "--t", "0.5i",
                 "--out", str(tmp_path)])
    assert code in (0, 4)
    report = read_json(tmp_path / "classical_report.json")
    assert report["near_focal"]
    assert report["max_conditioning"] == pytest.approx(report["records"][0]["conditioning"])


def test_problem_flag_is_required():
    with pytest.raises(SystemExit) as exc:
        main(["kernel"])
    assert exc.value.code == 2


@pytest.mark.slow
def test_verify_reports_failure(problems_dir, tmp_path):
    code = main(["verify", "--problem", problem_path(problems_dir, "reality_violating"), "--out", str(tmp_path)])
    assert code == 4
    report = read_json(tmp_path / "verification_report.json")
    assert not report["passed"]
    assert report["counts"]["FAIL"] >= 1


@pytest.mark.slow
def test_verify_uses_full_sample_counts(problems_dir, tmp_path):
    code = main(["verify", "--problem", problem_path(problems_dir, "free"), "--out", str(tmp_path)])
    assert code == 0
    checks = {c["name"]: c for c in read_json(tmp_path / "verification_report.json")["checks"]}
    assert checks["eikonal_and_identities"]["samples"] == 20
    assert checks["positivity"]["samples"] == 500
    assert checks["schrodinger_uniform_majorant"]["status"] == "SKIPPED"


# ===== parseo =====

def test_parse_points_grid():
    xs, ys = parse_points("grid:-1:1:3", 2)
    assert xs.shape == ys.shape == (9, 2)
    np.testing.assert_allclose(xs[:3, 0], [-1.0, -1.0, -1.0])
    np.testing.assert_allclose(ys[:3, 0], [-1.0, 0.0, 1.0])
    assert np.all(xs[:, 1] == 0.0)


def test_parse_points_pairs_and_default():
    xs, ys = parse_points("0.1,0.2|0.3,0.4; -1,0|0,1", 2)
    np.testing.assert_allclose(xs, [[0.1, 0.2], [-1.0, 0.0]])
    np.testing.assert_allclose(ys, [[0.3, 0.4], [0.0, 1.0]])
    xs, ys = parse_points(None, 1)
    assert xs[0, 0] == 0.5 and ys[0, 0] == -0.5


@pytest.mark.parametrize("text", ["0.1", "0.1|0.2,0.3", "grid:0:1", "a|b", ";"])
def test_parse_points_rejects_malformed(text):
    with pytest.raises(ProblemDefinitionError):
        parse_points(text, 1)


def test_parse_times():
    assert parse_times("0.2, 0.3i,1-0.1i") == [0.2, 0.3j, 1 - 0.1j]
    with pytest.raises(ProblemDefinitionError):
        parse_times("abc")
    with pytest.raises(ProblemDefinitionError):
        parse_times(",")