import json
import math

import numpy as np
import pandas as pd
import pytest

import hyperlattice
from errors import NumericError


def run(capsys, *argv):
    code = hyperlattice.main(list(argv), environ={})
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


# ─── admissibility and verdicts ───────────────────────────────────────────────
def test_admissibility_alpha2(capsys):
    code, body = run_json(capsys, "admissibility", "--alpha", "2", "--n", "0")
    assert code == 0
    assert body["schema_version"] == 1 and body["command"] == "admissibility"
    assert body["ratio"] == pytest.approx(1.0)
    assert body["ratio_residual"] < 1e-8
    assert body["formal_dimension"] == pytest.approx(1.0)


def test_admissibility_excited_window(capsys):
    code, body = run_json(capsys, "admissibility", "--alpha", "1.5", "--n", "3")
    assert code == 0
    assert body["ratio"] == pytest.approx(4 / 3, rel=1e-8)


def test_domain_error_exit_code(capsys):
    code, _ = run(capsys, "admissibility", "--alpha", "0")
    assert code == 2


def test_numeric_error_exit_code(capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise NumericError("injected failure")
    monkeypatch.setattr(hyperlattice, "formal_dimension", broken)
    code, _ = run(capsys, "admissibility")
    assert code == 3


def test_admissibility_small_alpha(capsys):
    code, body = run_json(capsys, "admissibility", "--alpha", "0.1")
    assert code == 0
    assert body["ratio"] == pytest.approx(20.0, rel=1e-8)
    assert body["formal_dimension"] == pytest.approx(0.05, rel=1e-8)


@pytest.mark.parametrize("failure", [ZeroDivisionError("division by zero"),
                                     np.linalg.LinAlgError("Singular matrix"),
                                     ValueError("array must not contain infs or NaNs"),
                                     FloatingPointError("overflow")])
def test_library_failures_exit_as_numeric(capsys, monkeypatch, failure):
    def broken(*args, **kwargs):
        raise failure
    monkeypatch.setattr(hyperlattice, "formal_dimension", broken)
    code, _ = run(capsys, "admissibility")
    assert code == 3


@pytest.mark.parametrize("argv, frame, riesz", [
    (("--group", "modular", "--alpha", "2"), False, True),
    (("--group", "modular", "--alpha", "1"), True, False),
    (("--covolume", "2.0", "--alpha", "1"), True, True),
])
def test_verdicts(capsys, argv, frame, riesz):
    code, body = run_json(capsys, "verdict", *argv)
    assert code == 0
    assert body["frame_admissible"] is frame
    assert body["riesz_admissible"] is riesz


def test_modular_alpha1_product(capsys):
    _, body = run_json(capsys, "verdict", "--alpha", "1")
    assert body["product"] == pytest.approx(math.pi / 6, abs=1e-6)


def test_unknown_group_is_domain_error(capsys):
    code, _ = run(capsys, "verdict", "--group", "triangle")
    assert code == 2


def test_sweep(capsys):
    code, body = run_json(capsys, "sweep", "--groups", "modular,hecke:5", "--alphas", "1,2")
    assert code == 0
    assert len(body["verdicts"]) == 4
    assert [row["group"] for row in body["group_summary"]] == ["modular", "hecke:5"]


def test_covolume_command(capsys):
    code, body = run_json(capsys, "covolume", "--group", "hecke", "--q", "5")
    assert code == 0
    assert body["covolume"] == pytest.approx(math.pi * (1 - 2 / 5), abs=1e-5)
    assert body["residual"] < 1e-5


def test_covolume_panel_nodes_flag(capsys):
    _, default = run_json(capsys, "covolume")
    _, haar_flag = run_json(capsys, "covolume", "--nodes-a", "5")
    assert haar_flag["covolume"] == default["covolume"]
    code, body = run_json(capsys, "covolume", "--panel-nodes", "8")
    assert code == 0 and body["residual"] < 1e-6
    _, crude = run_json(capsys, "covolume", "--panel-nodes", "1")
    assert crude["covolume"] != default["covolume"]
    code, _ = run(capsys, "covolume", "--panel-nodes", "0")
    assert code == 2


# ─── tiles ────────────────────────────────────────────────────────────────────
def test_tile_single_point(capsys):
    code, body = run_json(capsys, "tile", "--points=2j", "--word-length", "2")
    assert code == 0
    assert body["assignments"][0]["word"] == "I"
    assert body["tiles"] == [{"word": "I", "count": 1, "length": 0}]


def test_tile_random_points_conserve_count(capsys, tmp_path):
    svg = tmp_path / "tiles.svg"
    code, body = run_json(capsys, "tile", "--samples", "1000", "--word-length", "3",
                          "--svg", str(svg))
    assert code == 0
    assert body["assigned"] + body["flagged"] == 1000
    assert sum(row["count"] for row in body["tiles"]) == body["assigned"]
    assert svg.read_text(encoding="utf-8").startswith("<?xml")


# ─── finite demo ──────────────────────────────────────────────────────────────
def test_finite_demo_full(capsys):
    code, body = run_json(capsys, "finite-demo", "--N", "8")
    assert code == 0
    assert body["K"] == 64 and body["is_frame"]
    bounds = body["frame_bounds"]
    assert bounds["A"] == pytest.approx(bounds["B"])


def test_finite_demo_small_subgroup(capsys):
    code, body = run_json(capsys, "finite-demo", "--N", "8", "--K", "4")
    assert code == 0
    assert body["frame_bounds"]["A"] == 0.0
    assert not body["is_frame"]


def test_finite_demo_n2_full(capsys):
    _, body = run_json(capsys, "finite-demo", "--N", "2", "--K", "4")
    assert body["frame_bounds"]["A"] == pytest.approx(body["frame_bounds"]["B"])


def test_finite_demo_invalid_subgroup(capsys):
    code, _ = run(capsys, "finite-demo", "--N", "4", "--selection", "diagonal")
    assert code == 2


# ─── output contract ──────────────────────────────────────────────────────────
def test_canonical_json_is_deterministic(capsys):
    argv = ("verdict", "--alpha", "1.5", "--format", "json", "--canonical")
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert first == second
    assert json.dumps(json.loads(first), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False) + "\n" == first


@pytest.mark.parametrize("argv", [
    ("admissibility", "--alpha", "1.5", "--n", "2"),
    ("verdict", "--group", "hecke:5"),
    ("covolume", "--group", "hecke", "--q", "6"),
    ("tile", "--samples", "50", "--word-length", "2"),
    ("finite-demo", "--N", "4", "--K", "4"),
    ("sweep", "--groups", "modular", "--alphas", "1,2"),
    ("periodization", "--word-length", "1", "--nodes-a", "9", "--nodes-b", "9",
     "--nodes-theta", "2"),
    pytest.param(("identity-suite",), marks=pytest.mark.slow),
])
def test_canonical_json_survives_reparse(capsys, argv):
    _, out = run(capsys, *argv, "--format", "json", "--canonical")
    assert json.dumps(json.loads(out), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False) + "\n" == out


def test_text_format_default(capsys):
    code, out = run(capsys, "verdict")
    assert code == 0
    assert out.startswith("hyperlattice verdict")


def test_out_file_and_xlsx(capsys, tmp_path):
    json_path = tmp_path / "v.json"
    code, out = run(capsys, "verdict", "--format", "json", "--out", str(json_path))
    assert code == 0 and out == ""
    assert json.loads(json_path.read_text())["command"] == "verdict"
    xlsx = tmp_path / "sweep.xlsx"
    code, _ = run(capsys, "sweep", "--format", "xlsx", "--out", str(xlsx))
    assert code == 0
    sheets = pd.read_excel(xlsx, sheet_name=None, engine="openpyxl")
    assert list(sheets) == ["Summary", "verdicts", "group_summary"]


def test_xlsx_needs_out(capsys):
    code, _ = run(capsys, "verdict", "--format", "xlsx")
    assert code == 2


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("alpha = 1\ngroup = hecke:4\n")
    _, body = run_json(capsys, "verdict", "--config", str(cfg))
    assert body["alpha"] == 1.0 and body["group"] == "hecke:4"
    _, body = run_json(capsys, "verdict", "--config", str(cfg), "--alpha", "3")
    assert body["alpha"] == 3.0


# ─── identity suite ───────────────────────────────────────────────────────────
@pytest.mark.slow
def test_identity_suite_passes(capsys):
    code, body = run_json(capsys, "identity-suite")
    failed = [row for row in body["checks"] if not row["passed"]]
    assert failed == []
    assert code == 0
    assert [row["check"] for row in body["checks"]] == [
        "intertwining", "stationarity", "calderon", "orthogonality", "range", "periodization"]


@pytest.mark.slow
def test_identity_suite_corrupted_window(capsys):
    code, body = run_json(capsys, "identity-suite", "--corrupt-window")
    rows = {row["check"]: row for row in body["checks"]}
    assert code == 1
    assert not rows["stationarity"]["passed"]
    assert rows["calderon"]["passed"]


@pytest.mark.slow
def test_identity_suite_zero_tolerance(capsys):
    code, body = run_json(capsys, "identity-suite", "--tolerance", "0")
    assert code == 1
    assert not any(row["passed"] for row in body["checks"])


def test_identity_suite_reports_numeric_failures(capsys, monkeypatch):
    def broken(*args, **kwargs):
        raise NumericError("injected failure")
    for name in ("intertwine_residual", "stationarity_report", "wspace_inner",
                 "ortho_relation_check", "range_residual", "periodization_check"):
        monkeypatch.setattr(hyperlattice, name, broken)
    code, body = run_json(capsys, "identity-suite")
    assert code == 1
    assert all(row["note"].startswith("NumericError") for row in body["checks"])
    assert all(row["residual"] == "nan" for row in body["checks"])
