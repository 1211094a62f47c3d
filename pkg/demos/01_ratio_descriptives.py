"""
Rent-to-value descriptives on a tiny tract extract
==================================================

Loads a handful of tracts for two toy areas, then walks the descriptive
layer: the annualized rent/value ratio, per-area quantile summaries,
attribute medians, a correlation matrix, and a robust Theil-Sen fit.
"""

import tempfile
from pathlib import Path

import numpy as np

from rpvspatial import (
    Scope,
    compute_rpv,
    correlation_matrix,
    group_medians,
    load_attributes,
    log_transform,
    quantile_summary,
    theil_sen_fit,
)
from rpvspatial.descriptive import add_rpv

# --- a small extract in the attribute CSV schema ---------------------------

header = (
    "geoid,area_code,scope,med_rent_2br,med_value,med_income,perc_pov,"
    "perc_white,perc_black,perc_vac,rent_vac,perc_rent,med_year_built"
)
rng = np.random.default_rng(1)
rows = []
for i in range(40):
    area = "AAA" if i < 20 else "BBB"
    value = rng.uniform(50_000, 400_000)
    rent = rng.uniform(500, 2_200)
    income = rng.uniform(25_000, 110_000)
    blk = rng.uniform(0, 100)
    rows.append(
        f"t{i:010d},{area},CITY,{rent:.0f},{value:.0f},{income:.0f},"
        f"{rng.uniform(3, 40):.1f},{100 - blk:.1f},{blk:.1f},"
        f"{rng.uniform(2, 25):.1f},{rng.uniform(0, 10):.1f},{rng.uniform(20, 80):.1f},1965"
    )

csv_path = Path(tempfile.mkdtemp()) / "toy_extract.csv"
csv_path.write_text(header + "\n" + "\n".join(rows) + "\n")

ds = load_attributes(csv_path, Scope.CITY)
print(f"loaded {len(ds.records)} tracts ({len(ds.dropped)} dropped)")

# one tract's ratio: a $845 rent against a $99,300 value
print(f"\nexample ratio: {compute_rpv(845, 99_300):.4f} percent of value per year")

# --- per-area quantile summaries -------------------------------------------

print("\narea   mean     sd       q50      q75      q90      q95      n")
for area in ("AAA", "BBB"):
    s = quantile_summary(ds, area)
    print(
        f"{s.area_code}  {s.mean:7.3f}  {s.sd:7.3f}  {s.q50:7.3f}  "
        f"{s.q75:7.3f}  {s.q90:7.3f}  {s.q95:7.3f}  {s.n}"
    )

# --- attribute medians -------------------------------------------------------

med = group_medians(ds, "AAA")
print(f"\nAAA medians: income {med['med_income']:.0f}, value {med['med_value']:.0f}, "
      f"rent {med['med_rent_2br']:.0f} over {med['n']} tracts")

# --- correlations on the log-transformed analysis table ----------------------

table = add_rpv(log_transform(ds))
cols = ["RPV", "lnMedY", "lnMedVal", "PERCBLK"]
mat = correlation_matrix(table.for_area("AAA"), cols)
print("\ncorrelations (AAA):")
print("        " + "  ".join(f"{c:>8}" for c in cols))
for name, row in zip(cols, mat):
    print(f"{name:>8}" + "  ".join(f"{v:8.3f}" for v in row))

# --- Theil-Sen line: ratio against log value ---------------------------------

pts = np.column_stack([table.columns["lnMedVal"], table.columns["RPV"]])
line = theil_sen_fit(pts)
print(f"\nTheil-Sen: RPV ~ {line.intercept:.2f} + {line.slope:.2f} * lnMedVal  (n={line.n})")
print("the slope is the median of all pairwise slopes, so single outliers cannot move it")
