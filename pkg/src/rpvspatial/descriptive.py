"""Descriptive layer: ratio computation, z-scores, quantiles, medians,
correlations, and robust Theil-Sen scatter fits.

The rent-to-property-value ratio (RPV) is annualized 2-bedroom rent as a
percent of property value, 100 * 12 * rent / value; reported magnitudes
follow the percent convention throughout.  Quantiles use the type-7
linear-interpolation rule (rank h = (n-1)p on the sorted sample), which
also supplies every median used here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ingest import Dataset, DesignTable, Scope, ValidationError

__all__ = [
    "QuantileSummary",
    "TheilSenLine",
    "compute_rpv",
    "add_rpv",
    "zscores",
    "quantile",
    "quantile_summary",
    "group_medians",
    "correlation_matrix",
    "theil_sen_fit",
    "emit_scatter",
    "MEDIAN_FIELDS",
]

# attribute medians reported per area, in report column order
MEDIAN_FIELDS = [
    "perc_pov",
    "med_income",
    "perc_white",
    "perc_black",
    "perc_vac",
    "rent_vac",
    "med_rent_2br",
    "med_value",
    "perc_rent",
]


@dataclass(frozen=True)
class QuantileSummary:
    area_code: str
    scope: Scope
    mean: float
    sd: float
    q50: float
    q75: float
    q90: float
    q95: float
    n: int


@dataclass(frozen=True)
class TheilSenLine:
    slope: float
    intercept: float
    n: int


def compute_rpv(med_rent_2br: float, med_value: float) -> float:
    """Annualized rent as a percent of property value."""
    if med_rent_2br <= 0 or med_value <= 0:
        raise ValueError("rent and value must be positive")
    return 100.0 * 12.0 * med_rent_2br / med_value


def add_rpv(table: DesignTable) -> DesignTable:
    """Attach the RPV column computed from the rent/value levels."""
    rent = table.columns["MEDRENT"]
    value = table.columns["MEDVAL"]
    table.columns["RPV"] = 100.0 * 12.0 * rent / value
    return table


def zscores(values) -> np.ndarray:
    """Standardize with the sample (n-1) standard deviation."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two values")
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise ValueError("zero variance")
    return (x - x.mean()) / sd


def quantile(values, p: float) -> float:
    """Type-7 quantile: sort, then interpolate at rank h = (n-1)p."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        raise ValueError("empty input")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    h = (x.size - 1) * p
    lo = math.floor(h)
    if lo >= x.size - 1:
        return float(x[-1])
    return float(x[lo] + (h - lo) * (x[lo + 1] - x[lo]))


def _median(values) -> float:
    return quantile(values, 0.5)


def _area_records(ds: Dataset, area: str):
    recs = [r for r in ds.records if r.area_code == area]
    if not recs:
        raise ValidationError(f"unknown area: {area!r}")
    return recs


def quantile_summary(ds: Dataset, area: str) -> QuantileSummary:
    """Mean, sample SD and the 50/75/90/95% quantiles of tract RPV.

    A single-tract area reports SD 0; n = 1 flags the convention.
    """
    recs = _area_records(ds, area)
    rpv = np.array([compute_rpv(r.med_rent_2br, r.med_value) for r in recs])
    sd = float(np.std(rpv, ddof=1)) if rpv.size > 1 else 0.0
    return QuantileSummary(
        area_code=area,
        scope=recs[0].scope,
        mean=float(rpv.mean()),
        sd=sd,
        q50=quantile(rpv, 0.50),
        q75=quantile(rpv, 0.75),
        q90=quantile(rpv, 0.90),
        q95=quantile(rpv, 0.95),
        n=int(rpv.size),
    )


def group_medians(ds: Dataset, area: str) -> dict[str, float | int | None]:
    """Median of each attribute over the area's admitted tracts, plus N.

    Medians ignore missing values; a field missing everywhere reports None.
    """
    recs = _area_records(ds, area)
    out: dict[str, float | int | None] = {"n": len(recs)}
    for name in MEDIAN_FIELDS + ["med_year_built"]:
        vals = [getattr(r, name) for r in recs if getattr(r, name) is not None]
        out[name] = _median(vals) if vals else None
    return out


def correlation_matrix(table: DesignTable, columns: list[str]) -> np.ndarray:
    """Pearson correlations over pairwise-complete rows.

    The diagonal is exactly 1; a zero-variance column yields NaN against
    every other column rather than a fabricated 0.
    """
    for name in columns:
        if name not in table.columns:
            raise ValidationError(f"unknown column: {name}")
    data = [np.asarray(table.columns[name], dtype=float) for name in columns]
    complete = np.ones(table.n, dtype=bool)
    for col in data:
        complete &= ~np.isnan(col)
    if int(complete.sum()) < 3:
        raise ValidationError("need at least 3 rows complete on all selected columns")
    k = len(columns)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            mask = ~np.isnan(data[i]) & ~np.isnan(data[j])
            xi, xj = data[i][mask], data[j][mask]
            si, sj = float(np.std(xi)), float(np.std(xj))
            if xi.size < 2 or si == 0.0 or sj == 0.0:
                r = math.nan
            else:
                r = float(np.corrcoef(xi, xj)[0, 1])
            out[i, j] = out[j, i] = r
    return out


def theil_sen_fit(points) -> TheilSenLine:
    """Robust line: slope is the median of all pairwise slopes (pairs with
    equal x skipped), intercept the median of y - slope*x over the points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    ii, jj = np.triu_indices(x.size, k=1)
    dx = x[jj] - x[ii]
    keep = dx != 0.0
    if not keep.any():
        raise ValueError("vertical fit: all x identical")
    slopes = (y[jj] - y[ii])[keep] / dx[keep]
    slope = _median(slopes)
    intercept = _median(y - slope * x)
    return TheilSenLine(slope=slope, intercept=intercept, n=int(x.size))


def emit_scatter(
    table: DesignTable,
    x_col: str,
    y_col: str,
    path: str | Path,
    highlight_col: str = "PERCBLK",
    highlight_threshold: float = 50.0,
) -> tuple[Path, Path]:
    """Write scatter plot data plus a fitted-line sidecar.

    The data file holds ``geoid,x,y,highlight`` for rows complete on both
    axes (highlight = 1 where the highlight column meets the threshold).
    The sidecar ``<path stem>.line.csv`` holds one ``slope,intercept,
    q50,q95`` row, the line from :func:`theil_sen_fit` and the x-variable
    quantiles used as vertical reference lines; it stays header-only when
    no line is fittable.
    """
    for name in (x_col, y_col, highlight_col):
        if name not in table.columns:
            raise ValidationError(f"unknown column: {name}")
    path = Path(path)
    line_path = path.with_suffix("").parent / (path.with_suffix("").name + ".line.csv")
    x = np.asarray(table.columns[x_col], dtype=float)
    y = np.asarray(table.columns[y_col], dtype=float)
    hl = np.asarray(table.columns[highlight_col], dtype=float)
    mask = ~np.isnan(x) & ~np.isnan(y)

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["geoid", "x", "y", "highlight"])
        for i in np.flatnonzero(mask):
            flag = 1 if (not math.isnan(hl[i]) and hl[i] >= highlight_threshold) else 0
            writer.writerow([table.geoids[i], repr(float(x[i])), repr(float(y[i])), flag])

    with open(line_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slope", "intercept", "q50", "q95"])
        xs, ys = x[mask], y[mask]
        if xs.size >= 2 and np.unique(xs).size > 1:
            line = theil_sen_fit(np.column_stack([xs, ys]))
            writer.writerow(
                [repr(line.slope), repr(line.intercept), repr(quantile(xs, 0.50)), repr(quantile(xs, 0.95))]
            )
    return path, line_path
