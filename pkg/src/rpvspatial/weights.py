"""Contiguity-based spatial weights.

Queen contiguity of order one: two tracts are neighbors iff their
boundaries share at least one point (a vertex or any point along an
edge) within a snapping tolerance.  Detection uses a spatial hash of
ring vertices (exact shared vertices, the common case for census
geometries) plus a grid-bucketed segment-distance test that catches
near-coincident boundaries within the tolerance, so the expected cost
is linear in the total vertex count rather than quadratic in tracts.

Row standardization divides each row of the binary matrix by its
neighbor count; islands (no neighbors) keep an all-zero row.  The
eigenvalue information the lag-model estimator needs is taken from the
symmetric matrix D^(-1/2) A D^(-1/2), which is similar to the
row-standardized matrix and therefore shares its spectrum; island
rows contribute eigenvalue 0.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .ingest import ValidationError

__all__ = [
    "TractGeometry",
    "SpatialWeights",
    "queen_contiguity",
    "from_adjacency",
    "row_standardize",
    "eigen_bounds",
    "subset",
    "read_geojson",
    "write_geojson",
    "write_adjacency",
    "write_weights",
]

SNAP_TOL = 1e-9  # coordinate units; guards float noise on shared boundaries


@dataclass(frozen=True)
class TractGeometry:
    """Tract polygon as closed coordinate rings (planar x,y)."""

    geoid: str
    rings: tuple[tuple[tuple[float, float], ...], ...]

    def __post_init__(self):
        if not self.rings:
            raise ValidationError(f"geometry {self.geoid}: no rings")
        for ring in self.rings:
            if len(ring) < 4:
                raise ValidationError(
                    f"geometry {self.geoid}: degenerate ring with {len(ring)} points"
                )
            if ring[0] != ring[-1]:
                raise ValidationError(f"geometry {self.geoid}: ring is not closed")
            for x, y in ring:
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise ValidationError(f"geometry {self.geoid}: non-finite coordinate")


def _as_rings(raw) -> tuple[tuple[tuple[float, float], ...], ...]:
    return tuple(tuple((float(x), float(y)) for x, y in ring) for ring in raw)


def make_geometry(geoid: str, rings) -> TractGeometry:
    return TractGeometry(geoid=geoid, rings=_as_rings(rings))


@dataclass
class SpatialWeights:
    """Sparse row-oriented weights matrix over an ordered geoid list.

    ``neighbors`` always holds the binary contiguity structure (sorted
    column indices, no self-entries, symmetric); ``weights`` is aligned
    per row and differs from all-ones only after standardization.
    ``eigenvalues`` caches the spectrum of the symmetric similar matrix
    once :func:`eigen_bounds` has run.
    """

    ids: list[str]
    neighbors: list[list[int]]
    weights: list[list[float]]
    standardized: bool = False
    eigenvalues: np.ndarray | None = None
    symmetrized_edges: int = 0

    @property
    def n(self) -> int:
        return len(self.ids)

    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=float)

    def n_edges(self) -> int:
        return sum(len(nb) for nb in self.neighbors) // 2

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for i, (nbrs, wts) in enumerate(zip(self.neighbors, self.weights)):
            for j, w in zip(nbrs, wts):
                out[i, j] = w
        return out

    def lag(self, y: np.ndarray) -> np.ndarray:
        """Weighted neighbor average W @ y."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(self.n)
        for i, (nbrs, wts) in enumerate(zip(self.neighbors, self.weights)):
            if nbrs:
                out[i] = float(np.dot(wts, y[nbrs]))
        return out


def _build_binary(ids: list[str], pairs: set[tuple[int, int]]) -> SpatialWeights:
    neighbors: list[list[int]] = [[] for _ in ids]
    for i, j in pairs:
        neighbors[i].append(j)
        neighbors[j].append(i)
    neighbors = [sorted(nb) for nb in neighbors]
    weights = [[1.0] * len(nb) for nb in neighbors]
    return SpatialWeights(ids=list(ids), neighbors=neighbors, weights=weights)


# ---------------------------------------------------------------------------
# Queen contiguity from polygons
# ---------------------------------------------------------------------------

def _point_segment_dist(px, py, ax, ay, bx, by) -> float:
    vx, vy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    vv = vx * vx + vy * vy
    if vv == 0.0:
        return math.hypot(wx, wy)
    t = (wx * vx + wy * vy) / vv
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(px - (ax + t * vx), py - (ay + t * vy))


def _segments_cross(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    # strict proper crossing; touching cases are handled by distance tests
    d1 = (dx - cx) * (ay - cy) - (dy - cy) * (ax - cx)
    d2 = (dx - cx) * (by - cy) - (dy - cy) * (bx - cx)
    d3 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    d4 = (bx - ax) * (dy - ay) - (by - ay) * (dx - ax)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


def segment_distance(a, b, c, d) -> float:
    """Minimum distance between segments ab and cd (0 when they touch)."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    dx, dy = d
    if _segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    return min(
        _point_segment_dist(ax, ay, cx, cy, dx, dy),
        _point_segment_dist(bx, by, cx, cy, dx, dy),
        _point_segment_dist(cx, cy, ax, ay, bx, by),
        _point_segment_dist(dx, dy, ax, ay, bx, by),
    )


def _edges_of(geom: TractGeometry):
    for ring in geom.rings:
        for k in range(len(ring) - 1):
            yield ring[k], ring[k + 1]


def queen_contiguity(geoms: list[TractGeometry], tol: float = SNAP_TOL) -> SpatialWeights:
    """Binary order-1 Queen weights: shared boundary point => neighbors."""
    ids = [g.geoid for g in geoms]
    if len(set(ids)) != len(ids):
        dupes = sorted({g for g in ids if ids.count(g) > 1})
        raise ValidationError(f"duplicate geoid(s) in geometry set: {', '.join(dupes)}")

    pairs: set[tuple[int, int]] = set()

    def mark(i: int, j: int):
        if i != j:
            pairs.add((min(i, j), max(i, j)))

    # exact shared vertices via hash on the snapped coordinate grid
    vertex_owners: dict[tuple[int, int], list[int]] = {}
    for idx, geom in enumerate(geoms):
        seen_keys: set[tuple[int, int]] = set()
        for ring in geom.rings:
            for x, y in ring[:-1]:
                key = (round(x / tol), round(y / tol))
                if key in seen_keys:
                    continue
                seen_keys.add(key)
                owners = vertex_owners.setdefault(key, [])
                for other in owners:
                    mark(other, idx)
                owners.append(idx)

    # near-coincident boundaries: bucket edges on a coarse grid, then test
    # segment distance for cross-tract candidates
    edges: list[tuple[int, float, float, float, float]] = []
    max_span = 0.0
    for idx, geom in enumerate(geoms):
        for (ax, ay), (bx, by) in _edges_of(geom):
            edges.append((idx, ax, ay, bx, by))
            max_span = max(max_span, abs(bx - ax), abs(by - ay))
    cell = max(max_span, tol * 10.0, 1e-300)

    buckets: dict[tuple[int, int], list[int]] = {}
    for eidx, (_, ax, ay, bx, by) in enumerate(edges):
        x0 = math.floor((min(ax, bx) - tol) / cell)
        x1 = math.floor((max(ax, bx) + tol) / cell)
        y0 = math.floor((min(ay, by) - tol) / cell)
        y1 = math.floor((max(ay, by) + tol) / cell)
        for cx in range(x0, x1 + 1):
            for cy in range(y0, y1 + 1):
                buckets.setdefault((cx, cy), []).append(eidx)

    for members in buckets.values():
        for a_pos in range(len(members)):
            ei = edges[members[a_pos]]
            for b_pos in range(a_pos + 1, len(members)):
                ej = edges[members[b_pos]]
                if ei[0] == ej[0]:
                    continue
                key = (min(ei[0], ej[0]), max(ei[0], ej[0]))
                if key in pairs:
                    continue
                if segment_distance(ei[1:3], ei[3:5], ej[1:3], ej[3:5]) <= tol:
                    pairs.add(key)

    return _build_binary(ids, pairs)


# ---------------------------------------------------------------------------
# Adjacency-list construction and transforms
# ---------------------------------------------------------------------------

def from_adjacency(path, ids: list[str]) -> SpatialWeights:
    """Binary weights from an edge-list CSV (``geoid_i,geoid_j``).

    The result is closed under symmetrization; directed rows lacking
    their reverse are completed, with a warning carrying the count of
    added edges (also stored as ``symmetrized_edges``).
    """
    index = {g: i for i, g in enumerate(ids)}
    if len(index) != len(ids):
        raise ValidationError("duplicate geoid(s) in id list")
    directed: set[tuple[int, int]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["geoid_i", "geoid_j"]:
            raise ValidationError("adjacency file must have header geoid_i,geoid_j")
        for row in reader:
            if not row or not any(cell.strip() for cell in row):
                continue
            gi, gj = row[0].strip(), row[1].strip()
            for g in (gi, gj):
                if g not in index:
                    raise ValidationError(f"unknown geoid in adjacency file: {g}")
            if gi == gj:
                raise ValidationError(f"self edge not allowed: {gi}")
            directed.add((index[gi], index[gj]))
    added = sum(1 for (i, j) in directed if (j, i) not in directed)
    if added:
        warnings.warn(f"symmetrized adjacency: added {added} missing reverse edge(s)")
    pairs = {(min(i, j), max(i, j)) for i, j in directed}
    out = _build_binary(ids, pairs)
    out.symmetrized_edges = added
    return out


def row_standardize(w: SpatialWeights) -> SpatialWeights:
    """Divide each nonempty row by its neighbor count; islands stay zero."""
    if w.standardized:
        raise ValidationError("weights are already row-standardized")
    weights = [[1.0 / len(nb)] * len(nb) if nb else [] for nb in w.neighbors]
    return SpatialWeights(
        ids=list(w.ids),
        neighbors=[list(nb) for nb in w.neighbors],
        weights=weights,
        standardized=True,
        symmetrized_edges=w.symmetrized_edges,
    )


def _symmetric_similar(w: SpatialWeights) -> np.ndarray:
    """Dense D^(-1/2) A D^(-1/2) over the binary structure; islands zero."""
    deg = w.degrees()
    scale = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    out = np.zeros((w.n, w.n))
    for i, nbrs in enumerate(w.neighbors):
        for j in nbrs:
            out[i, j] = scale[i] * scale[j]
    return out


def eigen_bounds(w: SpatialWeights) -> tuple[float, float]:
    """Extreme eigenvalues of the symmetric similar matrix (cached on w).

    These bound the admissible spatial-autocorrelation interval for the
    lag model: rho in (1/lambda_min, 1/lambda_max), with lambda_max = 1
    for any row-standardized matrix holding at least one edge.
    """
    if w.n == 0:
        raise ValidationError("empty weights matrix")
    if not w.standardized:
        raise ValidationError("eigen_bounds requires row-standardized weights")
    if w.eigenvalues is None:
        w.eigenvalues = np.linalg.eigvalsh(_symmetric_similar(w))
    return float(w.eigenvalues[0]), float(w.eigenvalues[-1])


def subset(w: SpatialWeights, keep_ids: list[str]) -> SpatialWeights:
    """Induced binary subgraph over ``keep_ids`` (in that order)."""
    index = {g: i for i, g in enumerate(w.ids)}
    missing = [g for g in keep_ids if g not in index]
    if missing:
        raise ValidationError(f"unknown geoid(s) in subset: {', '.join(missing[:5])}")
    old_to_new = {index[g]: k for k, g in enumerate(keep_ids)}
    pairs: set[tuple[int, int]] = set()
    for g in keep_ids:
        i = index[g]
        for j in w.neighbors[i]:
            if j in old_to_new:
                a, b = old_to_new[i], old_to_new[j]
                pairs.add((min(a, b), max(a, b)))
    return _build_binary(list(keep_ids), pairs)


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def read_geojson(path) -> list[TractGeometry]:
    """Load a FeatureCollection; each feature needs a GEOID property.

    MultiPolygon parts are flattened into one ring list per tract (only
    boundary points matter for contiguity).
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("type") != "FeatureCollection":
        raise ValidationError("geometry file must be a GeoJSON FeatureCollection")
    geoms: list[TractGeometry] = []
    for feat in doc.get("features", []):
        props = feat.get("properties") or {}
        geoid = props.get("GEOID")
        if geoid is None:
            raise ValidationError("feature without GEOID property")
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        coords = geom.get("coordinates")
        if gtype == "Polygon":
            rings = coords
        elif gtype == "MultiPolygon":
            rings = [ring for poly in coords for ring in poly]
        else:
            raise ValidationError(f"feature {geoid}: unsupported geometry type {gtype!r}")
        geoms.append(make_geometry(str(geoid), rings))
    return geoms


def write_geojson(geoms: list[TractGeometry], path) -> None:
    features = []
    for g in geoms:
        features.append(
            {
                "type": "Feature",
                "properties": {"GEOID": g.geoid},
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[x, y] for x, y in ring] for ring in g.rings],
                },
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh)
        fh.write("\n")


def write_adjacency(w: SpatialWeights, path) -> None:
    """Edge list, one undirected edge per row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["geoid_i", "geoid_j"])
        for i, nbrs in enumerate(w.neighbors):
            for j in nbrs:
                if i < j:
                    writer.writerow([w.ids[i], w.ids[j]])


def write_weights(w: SpatialWeights, path) -> None:
    """Directed weight triples ``geoid_i,geoid_j,weight``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["geoid_i", "geoid_j", "weight"])
        for i, (nbrs, wts) in enumerate(zip(w.neighbors, w.weights)):
            for j, wt in zip(nbrs, wts):
                writer.writerow([w.ids[i], w.ids[j], repr(wt)])
