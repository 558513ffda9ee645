import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coalition_core import all_subsets
from conftest import random_point_set, regular_polygon
from mds_embed import Embedding
from spatial_geometry import (
    Bounds,
    PointSet,
    both_models_contained,
    cells_to_json,
    clip_polygon,
    convex_hull,
    grid_box,
    half_plane_coalitions,
    nearest_members,
    oracle_separable,
    oracle_voronoi_grid,
    polygon_area,
    voronoi_cell,
    voronoi_coalitions,
)
from swing_analysis import fifth_vote, mean_justice
from utils import GeometryError

LABELS = [f"J{i}" for i in range(1, 10)]


def _collinear() -> PointSet:
    return PointSet(labels=LABELS, coords=[(float(i), 0.0) for i in range(9)])


def _windows(labels, length=5):
    return [tuple(sorted(labels[i:i + length])) for i in range(len(labels) - length + 1)]


def _arcs(labels, length=5):
    n = len(labels)
    return sorted(tuple(sorted(labels[(i + j) % n] for j in range(length))) for i in range(n))


def _isometry(points: PointSet, rng) -> PointSet:
    angle = rng.uniform(0, 2 * np.pi)
    rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    if rng.uniform() < 0.5:
        rotation = rotation @ np.diag([1.0, -1.0])
    moved = points.array() @ rotation.T + rng.uniform(-5, 5, size=2)
    return PointSet(labels=points.labels, coords=[tuple(map(float, p)) for p in moved])


def _embedding(points: PointSet) -> Embedding:
    return Embedding(
        roster=points.labels, dimension=2, coords=[list(c) for c in points.coords],
        eigenvalues=[1.0, 1.0], spectrum=[1.0, 1.0],
    )


def test_collinear_voronoi_windows():
    cells = voronoi_coalitions(_collinear())
    assert [c.members for c in cells] == _windows(LABELS)


def test_collinear_half_planes_are_the_two_ends():
    lines = half_plane_coalitions(_collinear())
    assert [l.members for l in lines] == [tuple(LABELS[:5]), tuple(LABELS[4:])]
    for line in lines:
        assert line.margin == pytest.approx(0.5)


def test_regular_polygon_gives_contiguous_arcs():
    points = regular_polygon()
    assert [c.members for c in voronoi_coalitions(points)] == _arcs(points.labels)
    assert [l.members for l in half_plane_coalitions(points)] == _arcs(points.labels)


def test_regular_polygon_grid_oracle():
    points = regular_polygon()
    assert oracle_voronoi_grid(points, 512) == set(_arcs(points.labels))


def test_grid_oracle_finds_a_far_cluster():
    coords = [(100.0 + 0.1 * i, 0.3 * (i % 2)) for i in range(5)] + [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    points = PointSet(labels=LABELS, coords=coords)
    assert tuple(LABELS[:5]) in oracle_voronoi_grid(points, 128)


def test_coincident_points_rejected():
    coords = [(float(i), float(i * i)) for i in range(8)] + [(0.0, 0.0)]
    with pytest.raises(GeometryError, match="same point"):
        voronoi_coalitions(PointSet(labels=LABELS, coords=coords))
    with pytest.raises(GeometryError):
        half_plane_coalitions(PointSet(labels=LABELS, coords=coords))


def test_interleaved_subset_is_not_separable():
    assert not oracle_separable(("J1", "J3", "J5", "J7", "J9"), _collinear())


def test_separated_clusters_are_separable():
    coords = [(float(i), 0.0) for i in range(5)] + [(float(i), 10.0) for i in range(4)]
    assert oracle_separable(tuple(LABELS[:5]), PointSet(labels=LABELS, coords=coords))


def test_random_configurations_soundness_and_oracle_equivalence():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        points = random_point_set(rng)
        for cell in voronoi_coalitions(points):
            assert nearest_members(points, cell.witness) == cell.members
            assert cell.margin > 0
            assert polygon_area(cell.polygon) > 0
        lines = half_plane_coalitions(points)
        separable = {members for members in all_subsets(points.labels) if oracle_separable(members, points)}
        assert {line.members for line in lines} == separable
        arr = points.array()
        for line in lines:
            normal = np.asarray(line.normal)
            inside = points.subset_mask(line.members)
            assert np.all(arr[inside] @ normal < line.offset)
            assert np.all(arr[~inside] @ normal > line.offset)


def test_grid_oracle_is_contained_and_sees_wide_cells():
    rng = np.random.default_rng(99)
    resolution = 256
    for _ in range(100):
        points = random_point_set(rng)
        exact = {cell.members for cell in voronoi_coalitions(points)}
        sampled = oracle_voronoi_grid(points, resolution)
        assert sampled <= exact

        box = grid_box(points)
        spacing = max(box.xmax - box.xmin, box.ymax - box.ymin) / (resolution - 1)
        for members in exact:
            cell = voronoi_cell(points, members, bounds=box)
            if cell is None:
                continue
            x, y = cell.witness
            edge = min(x - box.xmin, box.xmax - x, y - box.ymin, box.ymax - y)
            if min(cell.margin, edge) > 2 * spacing:
                assert members in sampled


@pytest.mark.parametrize("seed", range(31, 41))
def test_isometry_invariance(seed):
    # 10 seeds x 50 layouts x 20 rigid motions
    rng = np.random.default_rng(seed)
    for _ in range(50):
        points = random_point_set(rng)
        voronoi = [c.members for c in voronoi_coalitions(points)]
        halfplane = [l.members for l in half_plane_coalitions(points)]
        embedding = _embedding(points)
        fifth = [(r.by_majority, r.by_minority) for r in (fifth_vote(embedding, m) for m in voronoi[:4])]
        mean = mean_justice(embedding).justice
        for _ in range(20):
            moved = _isometry(points, rng)
            assert [c.members for c in voronoi_coalitions(moved)] == voronoi
            assert [l.members for l in half_plane_coalitions(moved)] == halfplane
            moved_embedding = _embedding(moved)
            assert [(r.by_majority, r.by_minority) for r in (fifth_vote(moved_embedding, m) for m in voronoi[:4])] == fifth
            assert mean_justice(moved_embedding).justice == mean


def test_clip_polygon_square_by_diagonal():
    square = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    half = clip_polygon(square, (1.0, 1.0, 1.0))  # x + y <= 1
    assert polygon_area(half) == pytest.approx(0.5)
    assert clip_polygon(square, (1.0, 0.0, -1.0)) == []


def test_voronoi_cell_inside_a_viewport():
    points = _collinear()
    bounds = Bounds(xmin=-1.0, ymin=-1.0, xmax=9.0, ymax=1.0)
    cell = voronoi_cell(points, LABELS[2:7], bounds=bounds)
    xs = [p[0] for p in cell.polygon]
    assert min(xs) == pytest.approx(3.5)
    assert max(xs) == pytest.approx(4.5)
    assert voronoi_cell(points, ("J1", "J3", "J5", "J7", "J9"), bounds=bounds) is None


def test_convex_hull_drops_interior_and_collinear_points():
    hull = convex_hull([(0, 0), (2, 0), (1, 0), (2, 2), (0, 2), (1, 1)])
    assert hull == [(0, 0), (2, 0), (2, 2), (0, 2)]


def test_containment_diagnostic():
    voting = [("A", "B", "C", "D", "E"), ("B", "C", "D", "E", "F")]
    ok, exceptions = both_models_contained(voting, voronoi=[voting[0]], halfplane=voting)
    assert not ok
    assert exceptions == [voting[1]]


def test_cells_json_export():
    data = json.loads(cells_to_json(voronoi_coalitions(_collinear())))
    assert len(data) == 5
    assert set(data[0]) == {"members", "polygon", "witness", "margin", "clipped"}


grid_points = st.lists(
    st.tuples(st.integers(-20, 20), st.integers(-20, 20)),
    min_size=9, max_size=9, unique=True,
)


@given(grid_points)
@settings(max_examples=150, deadline=None)
def test_half_planes_match_hull_oracle_on_lattice_points(coords):
    points = PointSet(labels=LABELS, coords=[(float(x), float(y)) for x, y in coords])
    found = {line.members for line in half_plane_coalitions(points)}
    expected = {members for members in all_subsets(LABELS) if oracle_separable(members, points)}
    assert found == expected


@given(grid_points)
@settings(max_examples=60, deadline=None)
def test_voronoi_witnesses_verify_on_lattice_points(coords):
    points = PointSet(labels=LABELS, coords=[(float(x), float(y)) for x, y in coords])
    for cell in voronoi_coalitions(points):
        assert nearest_members(points, cell.witness) == cell.members


@given(
    st.floats(-1, 1, allow_nan=False), st.floats(-1, 1, allow_nan=False), st.floats(-2, 2, allow_nan=False),
)
def test_clipped_square_stays_in_half_plane(a, b, c):
    if abs(a) + abs(b) < 1e-3:
        return
    square = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]
    for x, y in clip_polygon(square, (a, b, c)):
        assert a * x + b * y <= c + 1e-9
        assert -1 - 1e-9 <= x <= 1 + 1e-9 and -1 - 1e-9 <= y <= 1 + 1e-9
