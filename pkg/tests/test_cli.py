import json

import numpy as np
import pytest

from holdercurves.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_dim_koch(capsys):
    code, out, _ = run(capsys, "dim", "--gallery", "koch")
    assert code == 0
    assert "s = 1.26186" in out


def test_cut_writes_cover(capsys, tmp_path):
    base = tmp_path / "cut"
    code, out, _ = run(capsys, "cut", "--gallery", "koch",
                       "--delta", "0.2", "--out", str(base))
    assert code == 0
    assert "16 words" in out and "mass" in out
    assert (tmp_path / "cut.csv").exists()


def test_connect_disconnected_exit_zero(capsys):
    code, out, _ = run(capsys, "connect", "--gallery", "cantor-pair")
    assert code == 0
    assert "Disconnected (certified)" in out
    assert "gap >=" in out


def test_connect_gasket_certified(capsys):
    code, out, _ = run(capsys, "connect", "--gallery", "gasket",
                       "--oracle", "exact")
    assert code == 0
    assert "Connected (certified)" in out


def test_usage_error_exit_1(capsys):
    assert main(["dim"]) == 1                      # no input chosen
    capsys.readouterr()
    assert main(["dim", "--gallery", "nope"]) == 1  # unknown gallery name
    capsys.readouterr()


def test_validation_error_exit_2(capsys):
    # param below the similarity dimension
    code, _, err = run(capsys, "param", "--gallery", "gasket",
                       "--alpha", "1.2", "--N", "1")
    assert code == 2
    assert "validation error" in err


def test_construction_error_exit_3(capsys):
    # cut budget exhausted: delta far below what the budget allows
    code, _, err = run(capsys, "cut", "--gallery", "koch",
                       "--delta", "1e-12")
    assert code == 3
    assert "construction error" in err


def test_carpet_report_json(capsys):
    code, out, _ = run(capsys, "carpet", "--gallery", "fig2-carpet")
    assert code == 0
    doc = json.loads(out[out.index("{"):])
    assert doc["dimensions"]["similarity"] == pytest.approx(np.log2(5.0))
    assert doc["connectivity"]["verdict"] == "connected"


def test_snowflake_arc_round_trip(capsys, tmp_path):
    base = tmp_path / "flake"
    code, out, _ = run(capsys, "snowflake", "--gallery", "fig3-snowflake",
                       "--out", str(base))
    assert code == 0
    path = tmp_path / "flake.ifs.json"
    assert path.exists()
    out_base = tmp_path / "arc"
    code, out, _ = run(capsys, "arc", "--spec", str(path), "--depth", "3",
                       "--out", str(out_base))
    assert code == 0
    assert "arc with" in out
    assert (tmp_path / "arc.csv").exists()
    assert (tmp_path / "arc.svg").exists()


def test_path_subcommand(capsys):
    code, out, _ = run(capsys, "path", "--gallery", "gasket",
                       "--x", "0,0", "--y", "1,0", "--m-max", "3")
    assert code == 0


def test_scan_koch(capsys, tmp_path):
    base = tmp_path / "scan"
    code, out, _ = run(capsys, "scan", "--gallery", "koch",
                       "--depths", "1,3,5", "--exponents", "1.05,1.5",
                       "--out", str(base))
    assert code == 0
    assert "alpha=1.05: diverging" in out
    assert "alpha=1.5: bounded" in out
    doc = json.loads((tmp_path / "scan.json").read_text())
    assert doc["verdicts"]["1.5"] == "bounded"


def test_gallery_listing(capsys):
    code, out, _ = run(capsys, "gallery")
    assert code == 0
    for name in ("koch", "gasket", "cantor-pair", "fig2-carpet",
                 "fig3-snowflake", "fig4-carpet", "sponge-235"):
        assert name in out


def test_tour_square(capsys, tmp_path):
    base = tmp_path / "tour"
    code, out, _ = run(capsys, "tour", "--gallery", "square", "--N", "1",
                       "--out", str(base))
    assert code == 0
    report = json.loads((tmp_path / "tour.json").read_text())
    level = report["levels"][0]
    assert level["edge_count"] == level["net_size"] - 1
    assert level["edge_min"] >= level["edge_window"][0]
    assert level["edge_max"] < level["edge_window"][1]
