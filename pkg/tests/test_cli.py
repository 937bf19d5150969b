import csv
import io
import json
import math
from pathlib import Path

import jsonschema
import pytest

from homophily.cli import main

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schema"


def schema(name):
    return json.loads((SCHEMAS / f"{name}.v1.json").read_text())


def run(capsys, *argv):
    code = main([*argv, "-q"])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def tiny(tmp_path):
    """Path 1-2-3 plus isolated 4, all labelled, with attributes."""
    d = tmp_path / "tiny"
    d.mkdir()
    (d / "edges.tsv").write_text("1\t2\n2\t3\n")
    (d / "labels.tsv").write_text("1\tA\n2\tA\n3\tA\n4\tB\n")
    (d / "attributes.tsv").write_text("1\t3\t3\n2\t5\t5\n3\t7\t7\n4\t9\t9\n")
    return d


@pytest.fixture
def five(tmp_path):
    d = tmp_path / "five"
    d.mkdir()
    (d / "edges.tsv").write_text("1\t2\n1\t3\n2\t3\n4\t5\n")
    (d / "labels.tsv").write_text("1\tA\n2\tA\n3\tB\n4\tC\n5\tC\n")
    (d / "attributes.tsv").write_text("1\t1\t2\n2\t3\t1\n3\t4\t4\n4\t0\t9\n5\t2\t2\n")
    return d


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    d = tmp_path_factory.mktemp("planted")
    cfg = d / "cfg.json"
    cfg.write_text(json.dumps({"n_users": 20000, "n_regions": 20, "coupling_slope": 3.0}))
    assert main(["synth", "--config", str(cfg), "--out", str(d / "data"), "--seed", "5", "-q"]) == 0
    return d / "data"


def test_stats_matches_hand_values(capsys, tiny):
    code, out, _ = run(capsys, "stats", str(tiny), "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("stats"))
    row = doc["datasets"][0]
    assert (row["n_users"], row["n_isolated"], row["n_edges"]) == (4, 1, 2)
    assert row["mean_degree"] == 1.0 and row["median_degree"] == 1.0
    assert math.isclose(row["degree_dispersion"], math.sqrt(0.5), abs_tol=1e-15)


def test_stats_two_datasets_keep_order(capsys, tiny, five):
    code, out, _ = run(capsys, "stats", str(five), str(tiny), "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["dataset", "|V|", "|I|", "|E|", "K_out", "S_out", "M_out"]
    assert [r[0] for r in rows[1:]] == ["five", "tiny"]
    assert rows[2] == ["tiny", "4", "1", "2", "1.00", "0.71", "1"]


def test_stats_explicit_files_and_names(capsys, tiny):
    code, out, _ = run(capsys, "stats", "--edges", str(tiny / "edges.tsv"), "--labels", str(tiny / "labels.tsv"),
                       "--name", "US", "--format", "table")
    assert code == 0
    assert out.splitlines()[2].split() == ["US", "4", "1", "2", "1.00", "0.71", "1"]


def test_missing_file_names_path(capsys, tmp_path):
    missing = tmp_path / "nope.tsv"
    code, out, err = run(capsys, "stats", "--edges", str(missing), "--labels", str(missing))
    assert code != 0 and str(missing) in err and out == ""


def test_parse_error_reports_line(capsys, tiny):
    (tiny / "edges.tsv").write_text("1\t2\n2\tx\n")
    code, _, err = run(capsys, "evaluate", str(tiny))
    assert code == 1 and "edges.tsv:2:" in err


def test_correlate(capsys, tmp_path):
    d = tmp_path / "c"
    d.mkdir()
    (d / "attributes.tsv").write_text("".join(f"{u}\t{u * 7 % 11}\t{u * 7 % 11}\n" for u in range(10)))
    code, out, _ = run(capsys, "correlate", "--attributes", str(d / "attributes.tsv"), "--format", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("correlate"))
    assert doc["datasets"][0]["correlation"]["friends_followers"] == 1.0
    assert [b["attribute"] for b in doc["datasets"][0]["box_stats"]] == ["friends", "followers", "ratio"]


def test_correlate_table_format(capsys, planted):
    code, out, _ = run(capsys, "correlate", str(planted))
    lines = out.splitlines()
    cells = lines[2].split()
    assert lines[0].split() == ["dataset", "friends--followers", "friends--ratio", "followers--ratio"]
    assert all(len(c.lstrip("-").split(".")[1]) == 2 for c in cells[1:])
    assert "#friends/#followers" in out


def test_correlate_empty_file(capsys, tmp_path):
    f = tmp_path / "empty.tsv"
    f.write_text("# nothing\n")
    code, _, err = run(capsys, "correlate", "--attributes", str(f))
    assert code != 0 and err


def test_evaluate_five_user(capsys, five):
    code, out, _ = run(capsys, "evaluate", str(five), "--format", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("evaluate"))
    r = doc["datasets"][0]
    assert (r["accuracy"], r["coverage"]) == (0.8, 1.0)


def test_evaluate_all_isolated_warns(capsys, tmp_path):
    d = tmp_path / "iso"
    d.mkdir()
    (d / "edges.tsv").write_text("")
    (d / "labels.tsv").write_text("1\tA\n2\tB\n")
    code = main(["evaluate", str(d), "--format", "json"])
    out, err = capsys.readouterr()
    assert code == 0
    r = json.loads(out)["datasets"][0]
    assert r["coverage"] == 0 and r["accuracy"] is None
    assert "WARNING" in err


def test_evaluate_workers_identical(capsys, planted):
    outs = [run(capsys, "evaluate", str(planted), "--format", "json", "--workers", w)[1] for w in ("1", "8")]
    assert outs[0] == outs[1]


def test_sweep_planted(capsys, planted, tmp_path):
    out_dir = tmp_path / "sw"
    code, _, _ = run(capsys, "sweep", str(planted), "--attribute", "ratio", "--direction", "HighCut",
                     "--format", "json", "--out", str(out_dir))
    assert code == 0
    doc = json.loads((out_dir / "sweep.json").read_text())
    jsonschema.validate(doc, schema("sweep"))
    best = doc["datasets"][0]["best"]
    assert 0.5 <= best["threshold"] <= 2.0
    assert best["accuracy"] > doc["datasets"][0]["baseline"]["accuracy"]
    curve = list(csv.reader(io.StringIO((out_dir / "curve_data_ratio_HighCut.csv").read_text())))
    assert curve[0] == ["threshold", "accuracy", "coverage", "n_correct", "n_estimable"]
    assert curve[1][0] == "baseline" and len(curve) == 1 + 1 + 101


def test_sweep_constant_attribute(capsys, tiny):
    code, out, err = run(capsys, "sweep", str(tiny), "--attribute", "ratio", "--format", "json")
    d = json.loads(out)["datasets"][0]
    assert d["best"] is None
    assert d["selected_accuracy"] == d["baseline"]["accuracy"]


def test_report_planted(capsys, planted):
    code, out, _ = run(capsys, "report", str(planted), "--format", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("report"))
    rows = doc["reports"][0]["rows"]
    assert [(r["attribute"], r["direction"]) for r in rows] == [
        ("friends", "HighCut"), ("followers", "HighCut"), ("ratio", "HighCut"), ("ratio", "LowCut"), (None, "none")]
    ratio = rows[2]
    assert ratio["significant"]
    assert all(ratio["accuracy"] > r["accuracy"] for k, r in enumerate(rows) if k != 2)

    code, table, _ = run(capsys, "report", str(planted))
    lines = table.splitlines()
    assert lines[0].split() == ["Dataset", "Attribute", "Filter", "Threshold", "Accuracy", "Coverage"]
    ratio_line = [ln for ln in lines if "#friends/#followers" in ln and "HighCut" in ln][0]
    assert ratio_line.split()[-2].endswith("*")


def test_report_csv_and_out_dir(capsys, five, tmp_path):
    code, _, _ = run(capsys, "report", str(five), "--format", "csv", "--out", str(tmp_path / "r"))
    rows = list(csv.reader(io.StringIO((tmp_path / "r" / "report.csv").read_text())))
    assert len(rows) == 6 and rows[5][2] == "none"


def test_flag_validation(capsys, five):
    for bad in (["--alpha", "0.7"], ["--coverage-floor", "1.5"], ["--workers", "0"]):
        with pytest.raises(SystemExit) as info:
            main(["report", str(five), *bad])
        assert info.value.code == 2
    capsys.readouterr()


def test_alpha_and_floor_flags_reach_report(capsys, planted):
    code, out, _ = run(capsys, "report", str(planted), "--format", "json", "--alpha", "0.01", "--coverage-floor", "0.5")
    rep = json.loads(out)["reports"][0]
    assert rep["alpha"] == 0.01 and rep["coverage_floor"] == 0.5
    for r in rep["rows"][:4]:
        if r["test"] is not None:
            assert r["coverage"] > 0.5 and r["test"]["alpha"] == 0.01


def test_synth_deterministic_and_consumable(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_users": 3000, "n_regions": 10, "coupling_slope": 2.0, "seed": 42}))
    for name in ("a", "b"):
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / name), "-q"]) == 0
    for f in ("edges.tsv", "labels.tsv", "attributes.tsv", "manifest.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    code, out, _ = run(capsys, "report", str(tmp_path / "a"))
    assert code == 0 and "#friends/#followers" in out


def test_synth_infeasible(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_users": 1000, "n_regions": 50, "max_degree": 100}))
    code, _, err = run(capsys, "synth", "--config", str(cfg), "--out", str(tmp_path / "x"))
    assert code == 1 and "max_degree" in err
