"""Synthetic lattice datasets with planted spatial-lag parameters.

Generation is fully deterministic given the seed: the random source is
numpy's PCG64 (a documented, portable 64-bit generator), and draws occur
in a fixed order (planted covariates, then the noise vector, then filler
attribute columns).  The response solves

    (I - rho W) y = X beta + eps

with W the row-standardized Queen weights of the rows x cols unit-square
grid; rho = 0 short-circuits to y = X beta + eps exactly.  The tract
table is emitted in the ingest attribute schema so the whole reporting
pipeline can run on synthetic data, alongside a truth sidecar naming the
planted parameters.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .ingest import Dataset, Scope, TractRecord, ValidationError, write_attributes
from .weights import SpatialWeights, TractGeometry, eigen_bounds, make_geometry, queen_contiguity, row_standardize, write_geojson

__all__ = ["SynthConfig", "SynthResult", "generate", "write_synth"]

# design columns the planted covariates map onto, in order
DESIGN_TARGETS = ["lnMedY", "lnMedVal", "PERCVAC", "PERCRENT", "PERCWHT", "PERCBLK"]

_FILLER_RANGES = {
    "lnMedY": (10.0, 12.0),
    "lnMedVal": (11.0, 13.5),
    "PERCVAC": (0.0, 30.0),
    "PERCRENT": (0.0, 100.0),
    "PERCWHT": (0.0, 100.0),
    "PERCBLK": (0.0, 100.0),
}


@dataclass(frozen=True)
class SynthConfig:
    rows: int = 30
    cols: int = 30
    rho_true: float = 0.4
    beta_true: tuple[float, ...] = (1.0, 2.0, -3.0)
    noise_sd: float = 1.0
    seed: int = 7
    # centered ranges keep the intercept inside the data cloud, so every
    # coefficient (not just slopes) is recovered with a tight tolerance
    covariate_spec: tuple[tuple[float, float], ...] = ((-2.0, 2.0), (-2.0, 2.0))

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError("grid must be at least 1x1")
        if len(self.beta_true) < 2:
            raise ValidationError("beta_true needs an intercept and at least one covariate")
        if len(self.covariate_spec) != len(self.beta_true) - 1:
            raise ValidationError("covariate_spec must cover every non-intercept coefficient")
        if len(self.covariate_spec) > len(DESIGN_TARGETS):
            raise ValidationError(f"at most {len(DESIGN_TARGETS)} covariates are supported")
        if self.rows * self.cols <= len(self.beta_true) + 2:
            raise ValidationError("grid too small for the parameter count")
        if self.noise_sd < 0:
            raise ValidationError("noise_sd must be nonnegative")
        for idx, (lo, hi) in enumerate(self.covariate_spec):
            if not lo < hi:
                raise ValidationError(f"covariate {idx}: empty uniform range ({lo}, {hi})")
            if idx >= 2 and not (0.0 <= lo and hi <= 100.0):
                # targets past the two log columns are percent fields
                raise ValidationError(f"covariate {idx}: percent range must lie in [0, 100]")


@dataclass
class SynthResult:
    ids: list[str]
    y: np.ndarray
    X: np.ndarray
    terms: list[str]
    geometries: list[TractGeometry]
    weights: SpatialWeights
    records: list[TractRecord]
    truth: dict[str, float]
    config: SynthConfig = field(repr=False, default=None)


def _grid_geometries(rows: int, cols: int) -> list[TractGeometry]:
    geoms = []
    for r in range(rows):
        for c in range(cols):
            gid = f"9{r:05d}{c:05d}"
            x, y = float(c), float(r)
            ring = [(x, y), (x + 1.0, y), (x + 1.0, y + 1.0), (x, y + 1.0), (x, y)]
            geoms.append(make_geometry(gid, [ring]))
    return geoms


def generate(cfg: SynthConfig) -> SynthResult:
    """Build the lattice, draw covariates and noise, and solve for y."""
    n = cfg.rows * cfg.cols
    geoms = _grid_geometries(cfg.rows, cfg.cols)
    w = row_standardize(queen_contiguity(geoms))
    lam_min, lam_max = eigen_bounds(w)
    if w.n_edges() > 0 and not (1.0 / lam_min < cfg.rho_true < 1.0):
        raise ValidationError(
            f"rho_true={cfg.rho_true} outside admissible interval ({1.0 / lam_min:.4f}, 1)"
        )

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    k = len(cfg.covariate_spec)
    covariates = [rng.uniform(lo, hi, n) for lo, hi in cfg.covariate_spec]
    eps = rng.normal(0.0, cfg.noise_sd, n)

    planted = dict(zip(DESIGN_TARGETS[:k], covariates))
    design_cols = {}
    for name in DESIGN_TARGETS:
        if name in planted:
            design_cols[name] = planted[name]
        else:
            lo, hi = _FILLER_RANGES[name]
            design_cols[name] = rng.uniform(lo, hi, n)
    perc_pov = rng.uniform(0.0, 50.0, n)
    rent_vac = rng.uniform(0.0, 12.0, n)
    year_built = rng.integers(1940, 2016, n)

    X = np.column_stack([np.ones(n)] + covariates)
    beta = np.asarray(cfg.beta_true, dtype=float)
    xb_eps = X @ beta + eps
    if cfg.rho_true == 0.0:
        y = xb_eps
    else:
        y = np.linalg.solve(np.eye(n) - cfg.rho_true * w.to_dense(), xb_eps)

    # shift the emitted dollar columns into plausible scales; downstream
    # regressions are on logs and z-scores, so shifts only move intercepts
    income_shift = 11.0 if "lnMedY" in planted else 0.0
    value_shift = 12.0 if "lnMedVal" in planted else 0.0
    med_income = np.exp(design_cols["lnMedY"] + income_shift)
    med_value = np.exp(design_cols["lnMedVal"] + value_shift)
    rpv = y - y.min() + 1.0  # positive shift; z-scores downstream are shift-invariant
    med_rent = rpv * med_value / 1200.0

    records = []
    for i, g in enumerate(geoms):
        records.append(
            TractRecord(
                geoid=g.geoid,
                area_code="SYN",
                scope=Scope.CITY,
                med_rent_2br=float(med_rent[i]),
                med_value=float(med_value[i]),
                med_income=float(med_income[i]),
                perc_pov=float(perc_pov[i]),
                perc_white=float(design_cols["PERCWHT"][i]),
                perc_black=float(design_cols["PERCBLK"][i]),
                perc_vac=float(design_cols["PERCVAC"][i]),
                rent_vac=float(rent_vac[i]),
                perc_rent=float(design_cols["PERCRENT"][i]),
                med_year_built=int(year_built[i]),
            )
        )

    truth = {"rho": cfg.rho_true}
    terms = ["Const"] + DESIGN_TARGETS[:k]
    for name, b in zip(terms, beta):
        truth[f"beta_{name}"] = float(b)
    truth["noise_sd"] = cfg.noise_sd
    truth["seed"] = float(cfg.seed)

    return SynthResult(
        ids=[g.geoid for g in geoms],
        y=y,
        X=X,
        terms=terms,
        geometries=geoms,
        weights=w,
        records=records,
        truth=truth,
        config=cfg,
    )


def write_synth(result: SynthResult, out_dir) -> dict[str, str]:
    """Write the attribute CSV, grid GeoJSON and truth sidecar; returns
    {artifact name: path}."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    attr_path = out / "synth_attributes.csv"
    geo_path = out / "synth_geometry.geojson"
    truth_path = out / "synth_truth.csv"
    write_attributes(Dataset(records=result.records), attr_path)
    write_geojson(result.geometries, geo_path)
    with open(truth_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["param", "value"])
        for key, value in result.truth.items():
            writer.writerow([key, repr(value)])
    return {
        "synth_attributes": str(attr_path),
        "synth_geometry": str(geo_path),
        "synth_truth": str(truth_path),
    }
