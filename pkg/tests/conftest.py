import numpy as np
import pytest

from rpvspatial.weights import SpatialWeights, make_geometry


def grid_geometries(rows, cols, skip=()):
    """Unit-square grid polygons; ``skip`` holds (row, col) cells to omit."""
    geoms = []
    for r in range(rows):
        for c in range(cols):
            if (r, c) in skip:
                continue
            x, y = float(c), float(r)
            ring = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1), (x, y)]
            geoms.append(make_geometry(f"G{r:03d}{c:03d}", [ring]))
    return geoms


def weights_from_pairs(ids, pairs):
    """Binary SpatialWeights from undirected index pairs."""
    neighbors = [[] for _ in ids]
    for i, j in pairs:
        neighbors[i].append(j)
        neighbors[j].append(i)
    neighbors = [sorted(set(nb)) for nb in neighbors]
    return SpatialWeights(
        ids=list(ids),
        neighbors=neighbors,
        weights=[[1.0] * len(nb) for nb in neighbors],
    )


def random_graph(rng, n, p=0.2):
    """Random symmetric binary weights over n nodes (may contain islands)."""
    pairs = set()
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                pairs.add((i, j))
    return weights_from_pairs([f"N{i}" for i in range(n)], pairs)


ATTR_HEADER = (
    "geoid,area_code,scope,med_rent_2br,med_value,med_income,perc_pov,"
    "perc_white,perc_black,perc_vac,rent_vac,perc_rent,med_year_built"
)


def write_attr_csv(path, rows):
    path.write_text(ATTR_HEADER + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def attr_csv(tmp_path):
    def _write(rows, name="attributes.csv"):
        return write_attr_csv(tmp_path / name, rows)

    return _write


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
