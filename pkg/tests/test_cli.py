import csv
import hashlib
import json
import subprocess
import sys

import pytest

from rpvspatial.cli import rank_areas, run
from rpvspatial.descriptive import QuantileSummary
from rpvspatial.ingest import Scope, ValidationError


def _summary(area, q50, q95, n=5):
    return QuantileSummary(
        area_code=area, scope=Scope.CITY, mean=q50, sd=1.0,
        q50=q50, q75=q50 + 1, q90=q95 - 1, q95=q95, n=n,
    )


def test_rank_areas_orders_descending():
    ordered, refs = rank_areas([_summary("LOW", 3, 6), _summary("HIGH", 20, 40), _summary("MID", 9, 12)])
    assert [s.area_code for s in ordered] == ["HIGH", "MID", "LOW"]
    assert refs["q50"] == 9
    assert refs["q95"] == 12


def test_rank_areas_tie_broken_by_q95_then_code():
    ordered, _ = rank_areas([_summary("BBB", 5, 10), _summary("AAA", 5, 10), _summary("CCC", 5, 12)])
    assert [s.area_code for s in ordered] == ["CCC", "AAA", "BBB"]


def test_rank_areas_single():
    ordered, refs = rank_areas([_summary("ONE", 7, 9)])
    assert ordered[0].area_code == "ONE"
    assert refs == {"q50": 7.0, "q95": 9.0}


def test_rank_areas_empty():
    with pytest.raises(ValidationError):
        rank_areas([])


# --- subcommands -------------------------------------------------------------

@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    code = run(["synth", "--out", str(out), "--rows", "6", "--cols", "6", "--seed", "7"])
    assert code == 0
    return out


def _manifest(out_dir):
    with open(out_dir / "manifest.json", encoding="utf-8") as fh:
        return json.load(fh)


def test_synth_writes_fixture_and_manifest(synth_dir):
    names = {e["artifact"] for e in _manifest(synth_dir)}
    assert names == {"synth_attributes", "synth_geometry", "synth_truth"}
    for entry in _manifest(synth_dir):
        path = synth_dir / entry["path"]
        blob = path.read_bytes()
        assert blob, entry["path"]
        assert hashlib.sha256(blob).hexdigest() == entry["sha256"]


def test_all_pipeline_on_synth_output(synth_dir, tmp_path):
    out = tmp_path / "report"
    code = run(
        [
            "all",
            "--attributes", str(synth_dir / "synth_attributes.csv"),
            "--geometry", str(synth_dir / "synth_geometry.geojson"),
            "--scope", "city",
            "--out", str(out),
        ]
    )
    assert code == 0
    names = {e["artifact"] for e in _manifest(out)}
    expected = {
        "validated_city",
        "dropped_report",
        "adjacency",
        "weights",
        "medians_city",
        "quantiles_city",
        "correlations_city",
        "rank_city",
        "fits_city",
        "fits_city_table",
        "scatter_SYN_city_lnMedVal",
        "scatter_SYN_city_lnMedVal_line",
        "scatter_SYN_city_lnMedY",
        "scatter_SYN_city_lnMedY_line",
    }
    assert expected <= names
    for entry in _manifest(out):
        assert (out / entry["path"]).stat().st_size > 0

    with open(out / "fits_city.csv", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    specs = {r["spec"] for r in rows}
    assert specs == {"PERCWHT", "PERCBLK"}
    assert {r["term"] for r in rows} >= {"Const", "lnMedY", "lnMedVal", "PERCVAC", "PERCRENT"}

    table = (out / "fits_city.txt").read_text(encoding="utf-8")
    header = table.splitlines()[0].split()
    assert header[:2] == ["AREA", "SPEC"]
    assert header[2:] == ["Const", "lnMedY", "lnMedVal", "PERCVAC", "PERCWHT", "PERCBLK", "PERCRENT", "rho", "AIC"]


def test_reports_byte_identical_across_reruns(synth_dir, tmp_path):
    args = [
        "describe",
        "--attributes", str(synth_dir / "synth_attributes.csv"),
        "--scope", "city",
    ]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert run(args + ["--out", str(out1)]) == 0
    assert run(args + ["--out", str(out2)]) == 0
    m1 = {e["path"]: e["sha256"] for e in _manifest(out1)}
    m2 = {e["path"]: e["sha256"] for e in _manifest(out2)}
    assert m1 == m2
    for rel in m1:
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes()


def test_rank_subcommand_sorted(synth_dir, tmp_path, attr_csv):
    rows = [
        "a0000000001,AAA,CITY,500,60000,40000,,,,,,,",   # rpv 10
        "b0000000001,BBB,CITY,500,120000,40000,,,,,,,",  # rpv 5
        "c0000000001,CCC,CITY,500,30000,40000,,,,,,,",   # rpv 20
    ]
    out = tmp_path / "rank"
    assert run(["rank", "--attributes", str(attr_csv(rows)), "--scope", "city", "--out", str(out)]) == 0
    with open(out / "rank_city.csv", encoding="utf-8") as fh:
        got = list(csv.DictReader(fh))
    assert [r["area"] for r in got] == ["CCC", "AAA", "BBB", "SAMPLE_MEDIAN"]
    assert float(got[-1]["q50"]) == 10.0


def test_ingest_writes_dropped_report(tmp_path, attr_csv):
    rows = [
        "a0000000001,AAA,CITY,500,60000,40000,,,,,,,",
        "a0000000002,AAA,CITY,,60000,40000,,,,,,,",
    ]
    path = attr_csv(rows, name="extract.csv")
    out = tmp_path / "ing"
    assert run(["ingest", "--attributes", str(path), "--scope", "city", "--out", str(out)]) == 0
    report = (out / "extract.csv.dropped.csv").read_text(encoding="utf-8").splitlines()
    assert report[0] == "geoid,reason"
    assert report[1] == "a0000000002,missing med_rent_2br"


def test_regress_without_weights_exits_1(synth_dir, tmp_path, capsys):
    code = run(
        [
            "regress",
            "--attributes", str(synth_dir / "synth_attributes.csv"),
            "--scope", "city",
            "--out", str(tmp_path / "x"),
        ]
    )
    assert code == 1
    assert "weights required" in capsys.readouterr().err


def test_regress_via_adjacency(synth_dir, tmp_path):
    # derive an adjacency file from the weights stage, then fit through it
    wout = tmp_path / "w"
    assert run(
        [
            "weights",
            "--attributes", str(synth_dir / "synth_attributes.csv"),
            "--geometry", str(synth_dir / "synth_geometry.geojson"),
            "--scope", "city",
            "--out", str(wout),
        ]
    ) == 0
    rout = tmp_path / "r"
    code = run(
        [
            "regress",
            "--attributes", str(synth_dir / "synth_attributes.csv"),
            "--adjacency", str(wout / "adjacency.csv"),
            "--scope", "city",
            "--race", "white",
            "--out", str(rout),
        ]
    )
    assert code == 0
    with open(rout / "fits_city.csv", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(r["spec"] == "PERCWHT" for r in rows)


def test_usage_error_exit_2():
    assert run([]) == 2
    assert run(["bogus"]) == 2
    assert run(["regress", "--attributes"]) == 2


def test_invalid_input_exit_1(tmp_path):
    missing = tmp_path / "nope.csv"
    assert run(["ingest", "--attributes", str(missing), "--scope", "city", "--out", str(tmp_path / "o")]) == 1


def test_console_entry_point(synth_dir, tmp_path):
    out = tmp_path / "sub"
    proc = subprocess.run(
        [sys.executable, "-m", "rpvspatial.cli", "synth", "--out", str(out), "--rows", "4", "--cols", "4"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (out / "manifest.json").exists()
