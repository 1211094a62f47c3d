"""Command-line pipeline: ingest, weights, describe, rank, regress, synth, all.

Exit codes: 0 success, 1 validation failure, 2 usage error.  Every run
writes ``manifest.json`` into the output directory, a JSON list of
{artifact, path, sha256} covering each report written; reports
themselves are deterministic, so re-running a command on the same
inputs reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import descriptive, sar
from .descriptive import QuantileSummary, add_rpv, quantile, quantile_summary
from .ingest import (
    Dataset,
    DesignTable,
    Scope,
    ValidationError,
    load_attributes,
    log_transform,
    partition_by_area,
    write_attributes,
    write_dropped_report,
)
from .synth import SynthConfig, generate, write_synth
from .weights import (
    from_adjacency,
    queen_contiguity,
    read_geojson,
    row_standardize,
    subset,
    write_adjacency,
    write_weights,
)

__all__ = ["run", "main", "rank_areas"]

CORRELATION_VARS = [
    "PERCPOV",
    "lnMedY",
    "PERCBLK",
    "PERCWHT",
    "PERCVAC",
    "RENTVAC",
    "lnMedVal",
    "MEDRENT",
    "lnMedYr",
]

REGRESSORS_COMMON = ["lnMedY", "lnMedVal", "PERCVAC"]
RACE_SPECS = {"white": "PERCWHT", "black": "PERCBLK"}

QUANTILE_HEADER = ["area", "scope", "mean", "sd", "q50", "q75", "q90", "q95", "n"]


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def rank_areas(summaries: list[QuantileSummary]) -> tuple[list[QuantileSummary], dict[str, float]]:
    """Order areas by median RPV descending (ties: q95 descending, then
    area code) and compute the sample-wide medians of q50 and q95 used
    as reference lines."""
    if not summaries:
        raise ValidationError("rank_areas needs at least one summary")
    ordered = sorted(summaries, key=lambda s: (-s.q50, -s.q95, s.area_code))
    refs = {
        "q50": quantile([s.q50 for s in summaries], 0.5),
        "q95": quantile([s.q95 for s in summaries], 0.5),
    }
    return ordered, refs


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _scopes(arg: str) -> list[Scope]:
    return {"city": [Scope.CITY], "msa": [Scope.MSA], "both": [Scope.CITY, Scope.MSA]}[arg]


class _Run:
    """Accumulates written artifacts for the manifest."""

    def __init__(self, out_dir: Path):
        self.out = out_dir
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts: list[tuple[str, Path]] = []

    def add(self, name: str, path: Path) -> Path:
        self.artifacts.append((name, path))
        return path

    def write_manifest(self) -> None:
        entries = []
        for name, path in self.artifacts:
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            entries.append(
                {"artifact": name, "path": str(path.relative_to(self.out)), "sha256": digest}
            )
        with open(self.out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(entries, fh, indent=2)
            fh.write("\n")


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------

def _stage_ingest(args, run: _Run) -> dict[Scope, Dataset]:
    datasets: dict[Scope, Dataset] = {}
    dropped_union: list[tuple[str, str]] = []
    seen_drops: set[tuple[str, str]] = set()
    for scope in _scopes(args.scope):
        ds = load_attributes(args.attributes, scope)
        datasets[scope] = ds
        for item in ds.dropped:
            if item not in seen_drops:
                seen_drops.add(item)
                dropped_union.append(item)
        tag = scope.value.lower()
        path = run.out / f"validated_{tag}.csv"
        write_attributes(ds, path)
        run.add(f"validated_{tag}", path)
        if ds.records:
            counts = {a: len(d) for a, d in partition_by_area(ds).items()}
            for area in sorted(counts):
                _diag(f"{scope.value} {area}: {counts[area]} tracts")
        else:
            _diag(f"{scope.value}: no admitted records")
    drop_path = run.out / f"{Path(args.attributes).name}.dropped.csv"
    write_dropped_report(dropped_union, drop_path)
    run.add("dropped_report", drop_path)
    return datasets


def _unique_geoids(datasets: dict[Scope, Dataset]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for scope in (Scope.CITY, Scope.MSA):
        ds = datasets.get(scope)
        if ds is None:
            continue
        for rec in ds.records:
            if rec.geoid not in seen:
                seen.add(rec.geoid)
                out.append(rec.geoid)
    return out


def _stage_weights(args, run: _Run, datasets: dict[Scope, Dataset] | None) -> None:
    if args.geometry:
        geoms = read_geojson(args.geometry)
        binary = queen_contiguity(geoms)
    elif args.adjacency:
        if datasets is None:
            datasets = _load_all(args)
        ids = _unique_geoids(datasets)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            binary = from_adjacency(args.adjacency, ids)
        for msg in caught:
            _diag(str(msg.message))
    else:
        raise ValidationError("weights required: pass --geometry or --adjacency")
    std = row_standardize(binary)
    adj_path = run.out / "adjacency.csv"
    write_adjacency(binary, adj_path)
    run.add("adjacency", adj_path)
    wts_path = run.out / "weights.csv"
    write_weights(std, wts_path)
    run.add("weights", wts_path)
    islands = sum(1 for nb in binary.neighbors if not nb)
    _diag(f"weights: {binary.n} tracts, {binary.n_edges()} edges, {islands} islands")


def _load_all(args) -> dict[Scope, Dataset]:
    return {scope: load_attributes(args.attributes, scope) for scope in _scopes(args.scope)}


def _analysis_table(ds: Dataset) -> DesignTable:
    table = add_rpv(log_transform(ds))
    for geoid, reason in table.dropped:
        _diag(f"excluded from analysis table: {geoid} ({reason})")
    return table


def _stage_describe(args, run: _Run, datasets: dict[Scope, Dataset]) -> None:
    for scope, ds in datasets.items():
        if not ds.records:
            continue
        tag = scope.value.lower()
        areas = sorted(partition_by_area(ds))
        table = _analysis_table(ds)

        med_header = ["area", "n"] + descriptive.MEDIAN_FIELDS + ["med_year_built"]
        med_rows = []
        for area in areas:
            med = descriptive.group_medians(ds, area)
            med_rows.append([area, med["n"]] + [_fmt_cell(med[f]) for f in med_header[2:]])
        path = run.out / f"medians_{tag}.csv"
        _write_csv(path, med_header, med_rows)
        run.add(f"medians_{tag}", path)

        qrows = []
        for area in areas:
            s = quantile_summary(ds, area)
            qrows.append(
                [s.area_code, scope.value]
                + [_fmt_cell(v) for v in (s.mean, s.sd, s.q50, s.q75, s.q90, s.q95)]
                + [s.n]
            )
        path = run.out / f"quantiles_{tag}.csv"
        _write_csv(path, QUANTILE_HEADER, qrows)
        run.add(f"quantiles_{tag}", path)

        corr_rows = []
        for area in areas:
            sub = table.for_area(area) if area in set(table.area_codes) else None
            if sub is None:
                _diag(f"correlations skipped for {area} ({scope.value}): no usable rows")
                continue
            try:
                mat = descriptive.correlation_matrix(sub, ["RPV"] + CORRELATION_VARS)
            except ValidationError as exc:
                _diag(f"correlations skipped for {area} ({scope.value}): {exc}")
                continue
            corr_rows.append([area] + [_fmt_cell(v) for v in mat[0, 1:]])
        path = run.out / f"correlations_{tag}.csv"
        _write_csv(path, ["area"] + CORRELATION_VARS, corr_rows)
        run.add(f"correlations_{tag}", path)

        for area in areas:
            if area not in set(table.area_codes):
                continue
            sub = table.for_area(area)
            for ycol in ("lnMedVal", "lnMedY"):
                path = run.out / f"scatter_{area}_{tag}_{ycol}.csv"
                data_path, line_path = descriptive.emit_scatter(sub, "RPV", ycol, path)
                run.add(f"scatter_{area}_{tag}_{ycol}", data_path)
                run.add(f"scatter_{area}_{tag}_{ycol}_line", line_path)


def _stage_rank(args, run: _Run, datasets: dict[Scope, Dataset]) -> None:
    for scope, ds in datasets.items():
        if not ds.records:
            continue
        tag = scope.value.lower()
        summaries = [quantile_summary(ds, area) for area in sorted(partition_by_area(ds))]
        ordered, refs = rank_areas(summaries)
        rows = [
            [s.area_code, scope.value]
            + [_fmt_cell(v) for v in (s.mean, s.sd, s.q50, s.q75, s.q90, s.q95)]
            + [s.n]
            for s in ordered
        ]
        rows.append(
            ["SAMPLE_MEDIAN", scope.value, "", "", _fmt_cell(refs["q50"]), "", "", _fmt_cell(refs["q95"]), ""]
        )
        path = run.out / f"rank_{tag}.csv"
        _write_csv(path, QUANTILE_HEADER, rows)
        run.add(f"rank_{tag}", path)


def _area_weights(args, ids: list[str], geoms_by_id, full_adjacency):
    if geoms_by_id is not None:
        missing = [g for g in ids if g not in geoms_by_id]
        if missing:
            raise ValidationError(
                f"{len(missing)} tract(s) missing from geometry, e.g. {missing[:3]}"
            )
        return row_standardize(queen_contiguity([geoms_by_id[g] for g in ids]))
    return row_standardize(subset(full_adjacency, ids))


def _stage_regress(args, run: _Run, datasets: dict[Scope, Dataset]) -> None:
    if not args.geometry and not args.adjacency:
        raise ValidationError("weights required: pass --geometry or --adjacency")
    races = ["white", "black"] if args.race == "both" else [args.race]

    geoms_by_id = None
    full_adjacency = None
    if args.geometry:
        geoms_by_id = {g.geoid: g for g in read_geojson(args.geometry)}
    else:
        ids = _unique_geoids(datasets)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            full_adjacency = from_adjacency(args.adjacency, ids)
        for msg in caught:
            _diag(str(msg.message))

    needed = ["RPV"] + REGRESSORS_COMMON + ["PERCWHT", "PERCBLK", "PERCRENT"]
    any_fit = False
    for scope, ds in datasets.items():
        if not ds.records:
            continue
        tag = scope.value.lower()
        table = _analysis_table(ds)
        fits: list[sar.SarFit] = []
        labels: list[tuple[str, str, str]] = []
        for area in sorted(set(table.area_codes)):
            sub = table.for_area(area)
            mask = np.ones(sub.n, dtype=bool)
            for col in needed:
                mask &= ~np.isnan(sub.columns[col])
            ids = [g for g, keep in zip(sub.geoids, mask) if keep]
            n = len(ids)
            if n < len(REGRESSORS_COMMON) + 5:
                _diag(f"regression skipped for {area} ({scope.value}): only {n} complete tracts")
                continue
            try:
                w = _area_weights(args, ids, geoms_by_id, full_adjacency)
                y = descriptive.zscores(sub.columns["RPV"][mask])
            except (ValidationError, ValueError) as exc:
                _diag(f"regression skipped for {area} ({scope.value}): {exc}")
                continue
            for race in races:
                race_col = RACE_SPECS[race]
                terms = ["Const"] + REGRESSORS_COMMON + [race_col, "PERCRENT"]
                X = np.column_stack(
                    [np.ones(n)] + [sub.columns[c][mask] for c in terms[1:]]
                )
                try:
                    fit = sar.fit_sar(y, X, w, names=terms)
                except (ValidationError, ValueError) as exc:
                    _diag(f"{race} specification failed for {area} ({scope.value}): {exc}")
                    continue
                fits.append(fit)
                labels.append((area, scope.value, race_col))
        csv_path = run.out / f"fits_{tag}.csv"
        _write_csv(csv_path, sar.FIT_REPORT_HEADER, sar.fit_report_rows(fits, labels))
        run.add(f"fits_{tag}", csv_path)
        txt_path = run.out / f"fits_{tag}.txt"
        txt_path.write_text(sar.render_fit_table(fits, labels), encoding="utf-8")
        run.add(f"fits_{tag}_table", txt_path)
        any_fit = any_fit or bool(fits)
    if not any_fit:
        raise ValidationError("no area could be fitted")


def _stage_synth(args, run: _Run) -> None:
    cfg = SynthConfig(
        rows=args.rows,
        cols=args.cols,
        rho_true=args.rho,
        noise_sd=args.noise_sd,
        seed=args.seed,
    )
    result = generate(cfg)
    for name, path in write_synth(result, run.out).items():
        run.add(name, Path(path))
    _diag(f"synthetic lattice: {cfg.rows}x{cfg.cols}, rho={cfg.rho_true}, seed={cfg.seed}")


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpvspatial",
        description="Tract-level rent-to-property-value reports and spatial lag regressions",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, attributes=True, weights=False):
        if attributes:
            p.add_argument("--attributes", required=True, help="tract attribute CSV")
        if weights:
            p.add_argument("--geometry", help="GeoJSON FeatureCollection of tract polygons")
            p.add_argument("--adjacency", help="precomputed edge list CSV (geoid_i,geoid_j)")
        p.add_argument("--scope", choices=["city", "msa", "both"], default="both")
        p.add_argument("--out", required=True, help="output directory")

    common(sub.add_parser("ingest", help="validate attributes and report dropped rows"))
    common(sub.add_parser("weights", help="build contiguity weights"), weights=True)
    common(sub.add_parser("describe", help="medians, correlations, quantiles, scatter data"))
    common(sub.add_parser("rank", help="areas ordered by median RPV"))
    p = sub.add_parser("regress", help="spatial lag regressions per area")
    common(p, weights=True)
    p.add_argument("--race", choices=["white", "black", "both"], default="both")
    p = sub.add_parser("synth", help="generate a synthetic lattice dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--rows", type=int, default=30)
    p.add_argument("--cols", type=int, default=30)
    p.add_argument("--rho", type=float, default=0.4)
    p.add_argument("--noise-sd", type=float, default=1.0)
    p = sub.add_parser("all", help="ingest, weights, describe, rank and regress")
    common(p, weights=True)
    p.add_argument("--race", choices=["white", "black", "both"], default="both")
    return parser


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    run_state = None
    try:
        run_state = _Run(Path(args.out))
        if args.subcommand == "synth":
            _stage_synth(args, run_state)
        elif args.subcommand == "ingest":
            _stage_ingest(args, run_state)
        elif args.subcommand == "weights":
            _stage_weights(args, run_state, None)
        elif args.subcommand == "describe":
            _stage_describe(args, run_state, _load_all(args))
        elif args.subcommand == "rank":
            _stage_rank(args, run_state, _load_all(args))
        elif args.subcommand == "regress":
            _stage_regress(args, run_state, _load_all(args))
        elif args.subcommand == "all":
            datasets = _stage_ingest(args, run_state)
            _stage_weights(args, run_state, datasets)
            _stage_describe(args, run_state, datasets)
            _stage_rank(args, run_state, datasets)
            _stage_regress(args, run_state, datasets)
    except (ValidationError, ValueError, OSError) as exc:
        _diag(f"error: {exc}")
        if run_state is not None:
            run_state.write_manifest()
        return 1
    run_state.write_manifest()
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
