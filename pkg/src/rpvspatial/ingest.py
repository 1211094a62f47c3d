"""Loading and validation of tract attribute tables.

Input is a UTF-8, comma-delimited CSV with one header row and columns exactly

    geoid,area_code,scope,med_rent_2br,med_value,med_income,perc_pov,
    perc_white,perc_black,perc_vac,rent_vac,perc_rent,med_year_built

Empty string means missing.  ``scope`` is ``CITY`` or ``MSA``.  Rows that
fail admission (missing or non-positive rent/value, out-of-range percents,
unparseable cells) are moved to a dropped list with a reason string rather
than aborting the load; duplicated (geoid, scope) keys are a hard error.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import numpy as np

__all__ = [
    "Scope",
    "TractRecord",
    "Provenance",
    "Dataset",
    "DesignTable",
    "ValidationError",
    "ATTRIBUTE_COLUMNS",
    "load_attributes",
    "write_attributes",
    "write_dropped_report",
    "partition_by_area",
    "log_transform",
]

ATTRIBUTE_COLUMNS = [
    "geoid",
    "area_code",
    "scope",
    "med_rent_2br",
    "med_value",
    "med_income",
    "perc_pov",
    "perc_white",
    "perc_black",
    "perc_vac",
    "rent_vac",
    "perc_rent",
    "med_year_built",
]

PERCENT_FIELDS = ["perc_pov", "perc_white", "perc_black", "perc_vac", "rent_vac", "perc_rent"]


class ValidationError(ValueError):
    """Input data violates a file- or record-level contract."""


class Scope(Enum):
    CITY = "CITY"
    MSA = "MSA"


@dataclass(frozen=True)
class TractRecord:
    """One census tract's attributes.

    ``med_rent_2br`` and ``med_value`` are guaranteed positive for any
    admitted record; percent fields are on the 0-100 scale and may be
    missing (None), as may ``med_income`` and ``med_year_built``.
    """

    geoid: str
    area_code: str
    scope: Scope
    med_rent_2br: float
    med_value: float
    med_income: float | None = None
    perc_pov: float | None = None
    perc_white: float | None = None
    perc_black: float | None = None
    perc_vac: float | None = None
    rent_vac: float | None = None
    perc_rent: float | None = None
    med_year_built: int | None = None


@dataclass(frozen=True)
class Provenance:
    source: str
    loaded_at: str  # ISO-8601; never propagated into report bodies


@dataclass
class Dataset:
    """Validated records plus the rows excluded on the way in."""

    records: list[TractRecord]
    dropped: list[tuple[str, str]] = field(default_factory=list)
    provenance: Provenance | None = None

    def __len__(self) -> int:
        return len(self.records)

    def geoids(self) -> list[str]:
        return [r.geoid for r in self.records]

    def area_codes(self) -> list[str]:
        return sorted({r.area_code for r in self.records})


@dataclass
class DesignTable:
    """Per-tract analysis columns (float arrays, NaN = missing).

    Produced by :func:`log_transform`; the log columns are ``lnMedY``,
    ``lnMedVal`` and ``lnMedYr``, percent fields pass through on the
    0-100 scale, and the raw rent/value levels ride along as ``MEDRENT``
    and ``MEDVAL`` for ratio computations downstream.
    """

    geoids: list[str]
    area_codes: list[str]
    scope: Scope
    columns: dict[str, np.ndarray]
    dropped: list[tuple[str, str]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.geoids)

    def for_area(self, area: str) -> "DesignTable":
        """Row subset for one area code (order preserved)."""
        idx = [i for i, a in enumerate(self.area_codes) if a == area]
        if not idx:
            raise ValidationError(f"unknown area: {area!r}")
        sel = np.asarray(idx, dtype=int)
        return DesignTable(
            geoids=[self.geoids[i] for i in idx],
            area_codes=[self.area_codes[i] for i in idx],
            scope=self.scope,
            columns={k: v[sel] for k, v in self.columns.items()},
        )


def _parse_float(raw: str, name: str) -> float | None:
    raw = raw.strip()
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"unparseable {name}")
    if not math.isfinite(value):
        raise ValueError(f"unparseable {name}")
    return value


def _parse_year(raw: str) -> int | None:
    value = _parse_float(raw, "med_year_built")
    if value is None:
        return None
    if value != int(value):
        raise ValueError("unparseable med_year_built")
    return int(value)


def _validate_row(row: dict[str, str], want: Scope) -> TractRecord | None:
    """Build a record from one CSV row, raising ValueError with the drop
    reason when the row fails admission.  Returns None for rows belonging
    to the other scope (skipped, not dropped)."""
    scope_raw = row["scope"].strip()
    try:
        scope = Scope(scope_raw)
    except ValueError:
        raise ValueError("unknown scope")
    if scope is not want:
        return None

    rent = _parse_float(row["med_rent_2br"], "med_rent_2br")
    if rent is None:
        raise ValueError("missing med_rent_2br")
    if rent <= 0:
        raise ValueError("non-positive med_rent_2br")
    value = _parse_float(row["med_value"], "med_value")
    if value is None:
        raise ValueError("missing med_value")
    if value <= 0:
        raise ValueError("non-positive med_value")

    percents: dict[str, float | None] = {}
    for name in PERCENT_FIELDS:
        p = _parse_float(row[name], name)
        if p is not None and not (0.0 <= p <= 100.0):
            raise ValueError(f"{name} out of range")
        percents[name] = p

    return TractRecord(
        geoid=row["geoid"].strip(),
        area_code=row["area_code"].strip(),
        scope=scope,
        med_rent_2br=rent,
        med_value=value,
        med_income=_parse_float(row["med_income"], "med_income"),
        med_year_built=_parse_year(row["med_year_built"]),
        **percents,
    )


def load_attributes(path: str | Path, scope: Scope) -> Dataset:
    """Load and validate the tract rows of one scope from an attribute CSV.

    Rows of the other scope are ignored; rows failing admission land in
    ``Dataset.dropped`` as (geoid, reason).  A duplicated geoid within the
    requested scope aborts the load.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if header != ATTRIBUTE_COLUMNS:
            missing = [c for c in ATTRIBUTE_COLUMNS if c not in header]
            if missing:
                raise ValidationError(f"missing required column(s): {', '.join(missing)}")
            raise ValidationError(
                f"unexpected header {header!r}; columns must be exactly {ATTRIBUTE_COLUMNS!r}"
            )
        records: list[TractRecord] = []
        dropped: list[tuple[str, str]] = []
        seen: set[str] = set()
        for row in reader:
            geoid = (row.get("geoid") or "").strip()
            try:
                rec = _validate_row(row, scope)
            except ValueError as exc:
                dropped.append((geoid, str(exc)))
                continue
            if rec is None:
                continue
            if not rec.geoid:
                dropped.append(("", "missing geoid"))
                continue
            if rec.geoid in seen:
                raise ValidationError(
                    f"duplicate (geoid, scope) key: {rec.geoid} / {scope.value}"
                )
            seen.add(rec.geoid)
            records.append(rec)
    prov = Provenance(source=str(path), loaded_at=datetime.now(timezone.utc).isoformat())
    return Dataset(records=records, dropped=dropped, provenance=prov)


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_attributes(ds: Dataset, path: str | Path) -> None:
    """Write records back in the attribute CSV schema (round-trippable)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ATTRIBUTE_COLUMNS)
        for r in ds.records:
            writer.writerow(
                [
                    r.geoid,
                    r.area_code,
                    r.scope.value,
                    _fmt(r.med_rent_2br),
                    _fmt(r.med_value),
                    _fmt(r.med_income),
                    _fmt(r.perc_pov),
                    _fmt(r.perc_white),
                    _fmt(r.perc_black),
                    _fmt(r.perc_vac),
                    _fmt(r.rent_vac),
                    _fmt(r.perc_rent),
                    _fmt(r.med_year_built),
                ]
            )


def write_dropped_report(dropped: list[tuple[str, str]], path: str | Path) -> None:
    """Companion report of excluded rows: columns ``geoid,reason``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["geoid", "reason"])
        writer.writerows(dropped)


def partition_by_area(ds: Dataset) -> dict[str, Dataset]:
    """Split a single-scope dataset into one dataset per area code.

    Record order within each area follows the input order; empty input is
    rejected, and a mixed-scope dataset is an error (load each scope
    separately, the map is keyed by area code alone).
    """
    if not ds.records:
        raise ValidationError("cannot partition an empty dataset")
    scopes = {r.scope for r in ds.records}
    if len(scopes) > 1:
        raise ValidationError("partition requires a single-scope dataset")
    out: dict[str, Dataset] = {}
    for rec in ds.records:
        out.setdefault(rec.area_code, Dataset(records=[], provenance=ds.provenance))
        out[rec.area_code].records.append(rec)
    return out


def log_transform(ds: Dataset) -> DesignTable:
    """Build the per-tract analysis table with natural-log income, value
    and year-built columns.

    Records without a positive ``med_income`` are dropped with a reason
    (income enters every model specification); a missing year built only
    blanks ``lnMedYr`` and the record is retained.
    """
    if not ds.records:
        raise ValidationError("cannot transform an empty dataset")
    scopes = {r.scope for r in ds.records}
    if len(scopes) > 1:
        raise ValidationError("log_transform requires a single-scope dataset")

    kept: list[TractRecord] = []
    dropped: list[tuple[str, str]] = []
    for rec in ds.records:
        if rec.med_income is None:
            dropped.append((rec.geoid, "missing med_income"))
        elif rec.med_income <= 0:
            dropped.append((rec.geoid, "non-positive med_income"))
        elif rec.med_year_built is not None and rec.med_year_built <= 0:
            dropped.append((rec.geoid, "non-positive med_year_built"))
        else:
            kept.append(rec)

    def col(getter) -> np.ndarray:
        return np.array([math.nan if getter(r) is None else float(getter(r)) for r in kept])

    columns = {
        "lnMedY": np.log(col(lambda r: r.med_income)),
        "lnMedVal": np.log(col(lambda r: r.med_value)),
        "lnMedYr": np.log(col(lambda r: r.med_year_built)),
        "PERCPOV": col(lambda r: r.perc_pov),
        "PERCWHT": col(lambda r: r.perc_white),
        "PERCBLK": col(lambda r: r.perc_black),
        "PERCVAC": col(lambda r: r.perc_vac),
        "RENTVAC": col(lambda r: r.rent_vac),
        "PERCRENT": col(lambda r: r.perc_rent),
        "MEDRENT": col(lambda r: r.med_rent_2br),
        "MEDVAL": col(lambda r: r.med_value),
    }
    return DesignTable(
        geoids=[r.geoid for r in kept],
        area_codes=[r.area_code for r in kept],
        scope=next(iter(scopes)),
        columns=columns,
        dropped=dropped,
    )
