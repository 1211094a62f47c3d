import math

import numpy as np
import pytest

from rpvspatial.ingest import (
    Scope,
    ValidationError,
    load_attributes,
    log_transform,
    partition_by_area,
    write_attributes,
    write_dropped_report,
)

GOOD_ROWS = [
    "55079000101,MKE,CITY,845,99300,37917,25.3,38.1,36.8,10.2,5.6,55.0,1952",
    "55079000102,MKE,CITY,900,120000,45000,20.0,50.0,30.0,8.0,4.0,60.0,1960",
    "26163000100,DET,CITY,789,41400,28990,36.5,4.9,92.1,27.9,4.0,52.0,1948",
    "26163000200,DET,MSA,800,127250,52411,13.4,73.2,12.3,8.0,2.8,40.0,1955",
]


def test_load_admits_valid_rows(attr_csv):
    ds = load_attributes(attr_csv(GOOD_ROWS), Scope.CITY)
    assert len(ds.records) == 3
    assert ds.dropped == []
    rec = ds.records[0]
    assert rec.geoid == "55079000101"
    assert rec.med_rent_2br == 845.0
    assert rec.med_value == 99300.0
    assert rec.scope is Scope.CITY
    assert rec.med_year_built == 1952


def test_load_filters_by_scope(attr_csv):
    path = attr_csv(GOOD_ROWS)
    city = load_attributes(path, Scope.CITY)
    msa = load_attributes(path, Scope.MSA)
    assert len(city.records) == 3
    assert len(msa.records) == 1
    assert msa.records[0].area_code == "DET"


def test_missing_value_dropped_with_reason(attr_csv):
    rows = GOOD_ROWS + ["55079000999,MKE,CITY,845,,37917,25.3,38.1,36.8,10.2,5.6,55.0,"]
    ds = load_attributes(attr_csv(rows), Scope.CITY)
    assert ("55079000999", "missing med_value") in ds.dropped
    assert all(r.geoid != "55079000999" for r in ds.records)


@pytest.mark.parametrize(
    "cell_override, reason",
    [
        ((3, ""), "missing med_rent_2br"),
        ((3, "0"), "non-positive med_rent_2br"),
        ((4, "-5"), "non-positive med_value"),
        ((6, "101"), "perc_pov out of range"),
        ((7, "-0.1"), "perc_white out of range"),
        ((4, "abc"), "unparseable med_value"),
        ((2, "REGION"), "unknown scope"),
        ((12, "1952.5"), "unparseable med_year_built"),
    ],
)
def test_admission_reasons(attr_csv, cell_override, reason):
    idx, value = cell_override
    cells = GOOD_ROWS[0].split(",")
    cells[idx] = value
    ds = load_attributes(attr_csv(GOOD_ROWS[1:] + [",".join(cells)]), Scope.CITY)
    assert (cells[0], reason) in ds.dropped


def test_missing_income_is_admitted(attr_csv):
    row = "55079000103,MKE,CITY,700,90000,,,,,,,,"
    ds = load_attributes(attr_csv([row]), Scope.CITY)
    assert len(ds.records) == 1
    assert ds.records[0].med_income is None
    assert ds.records[0].perc_pov is None


def test_duplicate_geoid_is_hard_error(attr_csv):
    rows = [GOOD_ROWS[0], GOOD_ROWS[0]]
    with pytest.raises(ValidationError, match="55079000101"):
        load_attributes(attr_csv(rows), Scope.CITY)


def test_duplicate_across_scopes_allowed(attr_csv):
    rows = [
        "55079000101,MKE,CITY,845,99300,37917,25.3,38.1,36.8,10.2,5.6,55.0,1952",
        "55079000101,MKE,MSA,845,99300,37917,25.3,38.1,36.8,10.2,5.6,55.0,1952",
    ]
    assert len(load_attributes(attr_csv(rows), Scope.CITY).records) == 1


def test_missing_column_is_hard_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("geoid,area_code,scope\nx,y,CITY\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="missing required column"):
        load_attributes(bad, Scope.CITY)


def test_unreadable_file_is_hard_error(tmp_path):
    with pytest.raises(ValidationError, match="cannot read"):
        load_attributes(tmp_path / "nope.csv", Scope.CITY)


def test_roundtrip_preserves_records(attr_csv, tmp_path):
    rows = GOOD_ROWS + ["55079000104,MKE,CITY,720.5,88000,,,,,,,,"]
    ds = load_attributes(attr_csv(rows), Scope.CITY)
    out = tmp_path / "rewritten.csv"
    write_attributes(ds, out)
    ds2 = load_attributes(out, Scope.CITY)
    assert ds2.records == ds.records


def test_admission_is_deterministic(attr_csv):
    rows = GOOD_ROWS + ["bad1,MKE,CITY,0,99300,1,2,3,4,5,6,7,"]
    path = attr_csv(rows)
    a = load_attributes(path, Scope.CITY)
    b = load_attributes(path, Scope.CITY)
    assert a.records == b.records
    assert a.dropped == b.dropped


def test_admitted_records_satisfy_invariants(attr_csv, rng):
    rows = []
    for i in range(60):
        rent = rng.uniform(-100, 2000)
        value = rng.uniform(-1000, 500000)
        pov = rng.uniform(-10, 110)
        rows.append(f"g{i:05d}ABCDE,AAA,CITY,{rent},{value},50000,{pov},10,10,10,10,10,1950")
    ds = load_attributes(attr_csv(rows), Scope.CITY)
    for rec in ds.records:
        assert rec.med_rent_2br > 0 and rec.med_value > 0
        assert 0 <= rec.perc_pov <= 100
    assert len(ds.records) + len(ds.dropped) == 60


def test_partition_by_area_counts(attr_csv):
    ds = load_attributes(attr_csv(GOOD_ROWS), Scope.CITY)
    parts = partition_by_area(ds)
    assert set(parts) == {"MKE", "DET"}
    assert len(parts["MKE"].records) == 2
    assert len(parts["DET"].records) == 1
    total = sum(len(p.records) for p in parts.values())
    assert total == len(ds.records)


def test_partition_single_area(attr_csv):
    ds = load_attributes(attr_csv(GOOD_ROWS[:2]), Scope.CITY)
    parts = partition_by_area(ds)
    assert list(parts) == ["MKE"]
    assert parts["MKE"].records == ds.records


def test_partition_rejects_empty(attr_csv):
    ds = load_attributes(attr_csv(GOOD_ROWS), Scope.MSA)
    ds.records.clear()
    with pytest.raises(ValidationError):
        partition_by_area(ds)


def test_log_transform_exact_values(attr_csv):
    income = math.exp(11.0)
    rows = [f"55079000101,MKE,CITY,845,99300,{income!r},25.3,38.1,36.8,10.2,5.6,55.0,1952"]
    table = log_transform(load_attributes(attr_csv(rows), Scope.CITY))
    assert table.columns["lnMedY"][0] == pytest.approx(11.0, abs=1e-12)
    assert table.columns["lnMedVal"][0] == pytest.approx(math.log(99300), abs=1e-12)
    assert table.columns["lnMedYr"][0] == pytest.approx(math.log(1952), abs=1e-12)
    assert table.columns["PERCBLK"][0] == 36.8


def test_log_transform_drops_nonpositive_income(attr_csv):
    rows = GOOD_ROWS[:2] + ["55079000105,MKE,CITY,700,90000,,,,,,,,"]
    table = log_transform(load_attributes(attr_csv(rows), Scope.CITY))
    assert ("55079000105", "missing med_income") in table.dropped
    assert "55079000105" not in table.geoids
    assert table.n == 2


def test_log_transform_keeps_missing_year(attr_csv):
    rows = ["55079000101,MKE,CITY,845,99300,37917,25.3,38.1,36.8,10.2,5.6,55.0,"]
    table = log_transform(load_attributes(attr_csv(rows), Scope.CITY))
    assert table.n == 1
    assert np.isnan(table.columns["lnMedYr"][0])


def test_dropped_report_format(tmp_path):
    path = tmp_path / "report.csv"
    write_dropped_report([("g1", "missing med_value"), ("g2", "perc_pov out of range")], path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "geoid,reason"
    assert lines[1] == "g1,missing med_value"
