"""
Planar coalition geometry for a court's 2-D MDS layout.

A Voronoi coalition owns a cell of the order-5 Voronoi diagram: a region of the
plane whose five nearest justices are exactly the coalition. A half-plane coalition
(a 5-set) can be cut off from the other four justices by a straight line.
"""
import itertools
import math
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel, model_validator

from coalition_core import COALITION_SIZE, canonical
from mds_embed import Embedding
from utils import GeometryError, rows_to_csv, to_json, warn

# strictness margin, as a multiple of the configuration diameter
DEFAULT_EPSILON = 1e-9
BOUNDING_FACTOR = 10.0
# circumcenters farther out than this many diameters do not widen the clipping box
CIRCUMCENTER_CAP = 1e4

Point = tuple[float, float]
HalfPlane = tuple[float, float, float]  # (a_x, a_y, b): a . p <= b


class PointSet(BaseModel):
    labels: list[str]
    coords: list[Point]

    @model_validator(mode='after')
    def _check(self):
        if len(self.labels) != len(self.coords):
            raise ValueError("labels and coords differ in length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be distinct")
        if not all(math.isfinite(x) and math.isfinite(y) for x, y in self.coords):
            raise ValueError("coordinates must be finite")
        return self

    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.float64).reshape(-1, 2)

    def diameter(self) -> float:
        arr = self.array()
        diff = arr[:, None, :] - arr[None, :, :]
        return float(np.sqrt((diff * diff).sum(axis=2)).max())

    def subset_mask(self, members: Iterable[str]) -> np.ndarray:
        wanted = set(members)
        unknown = wanted - set(self.labels)
        if unknown:
            raise GeometryError(f"Not in the point set: {', '.join(sorted(unknown))}")
        return np.array([label in wanted for label in self.labels])


class VoronoiCell(BaseModel):
    members: tuple[str, ...]
    polygon: list[Point]
    witness: Point
    margin: float
    clipped: bool = False


class SeparatingLine(BaseModel):
    members: tuple[str, ...]
    normal: Point
    offset: float
    margin: float


class Bounds(BaseModel):
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def polygon(self) -> list[Point]:
        return [(self.xmin, self.ymin), (self.xmax, self.ymin), (self.xmax, self.ymax), (self.xmin, self.ymax)]

    def contains(self, point: Point) -> bool:
        x, y = point
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax


def from_embedding(embedding: Embedding) -> PointSet:
    if embedding.dimension != 2:
        raise GeometryError("Planar coalition geometry needs a 2-D embedding.")
    return PointSet(labels=list(embedding.roster), coords=[(c[0], c[1]) for c in embedding.coords])


def check_distinct(points: PointSet):
    arr = points.array()
    scale = max(points.diameter(), 1.0)
    for i, j in itertools.combinations(range(len(points.labels)), 2):
        if float(np.hypot(*(arr[i] - arr[j]))) <= 1e-12 * scale:
            raise GeometryError(f"{points.labels[i]} and {points.labels[j]} occupy the same point.")


def clip_polygon(polygon: list[Point], half_plane: HalfPlane) -> list[Point]:
    """Sutherland-Hodgman step: the part of a convex polygon with a . p <= b."""
    ax, ay, b = half_plane
    result = []
    count = len(polygon)
    for i in range(count):
        cx, cy = polygon[i]
        nx_, ny_ = polygon[(i + 1) % count]
        fc = ax * cx + ay * cy - b
        fn = ax * nx_ + ay * ny_ - b
        if fc <= 0.0:
            result.append((cx, cy))
        if (fc < 0.0 < fn) or (fn < 0.0 < fc):
            t = fc / (fc - fn)
            result.append((cx + t * (nx_ - cx), cy + t * (ny_ - cy)))
    return result


def polygon_area(polygon: list[Point]) -> float:
    total = 0.0
    for (x0, y0), (x1, y1) in zip(polygon, polygon[1:] + polygon[:1]):
        total += x0 * y1 - x1 * y0
    return total / 2.0


def polygon_centroid(polygon: list[Point]) -> Point:
    area = polygon_area(polygon)
    cx = cy = 0.0
    for (x0, y0), (x1, y1) in zip(polygon, polygon[1:] + polygon[:1]):
        cross = x0 * y1 - x1 * y0
        cx += (x0 + x1) * cross
        cy += (y0 + y1) * cross
    return (cx / (6.0 * area), cy / (6.0 * area))


def bisector(s: np.ndarray, t: np.ndarray) -> HalfPlane:
    """Unit-normal half-plane of points strictly closer to s than to t (boundary included)."""
    a = 2.0 * (t - s)
    b = float(t @ t - s @ s)
    norm = float(np.hypot(*a))
    return (float(a[0]) / norm, float(a[1]) / norm, b / norm)


def _circumcenter(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> Optional[np.ndarray]:
    d = 2.0 * (p[0] * (q[1] - r[1]) + q[0] * (r[1] - p[1]) + r[0] * (p[1] - q[1]))
    if d == 0.0:
        return None
    pp, qq, rr = p @ p, q @ q, r @ r
    ux = (pp * (q[1] - r[1]) + qq * (r[1] - p[1]) + rr * (p[1] - q[1])) / d
    uy = (pp * (r[0] - q[0]) + qq * (p[0] - r[0]) + rr * (q[0] - p[0])) / d
    return np.array([ux, uy])


def clipping_bounds(points: PointSet) -> Bounds:
    """
    A square around the configuration, at least BOUNDING_FACTOR diameters wide and
    wide enough to hold every circumcenter of three seeds (all vertices of the
    higher-order diagrams) within the cap.
    """
    arr = points.array()
    center = (arr.min(axis=0) + arr.max(axis=0)) / 2.0
    diameter = points.diameter()
    half = BOUNDING_FACTOR * diameter / 2.0
    for i, j, k in itertools.combinations(range(len(arr)), 3):
        c = _circumcenter(arr[i], arr[j], arr[k])
        if c is None:
            continue
        reach = float(np.abs(c - center).max())
        if reach <= CIRCUMCENTER_CAP * diameter:
            half = max(half, 1.1 * reach)
    return Bounds(xmin=center[0] - half, ymin=center[1] - half, xmax=center[0] + half, ymax=center[1] + half)


def _on_bounds(polygon: list[Point], bounds: Bounds, tolerance: float) -> bool:
    for x, y in polygon:
        if (abs(x - bounds.xmin) <= tolerance or abs(x - bounds.xmax) <= tolerance
                or abs(y - bounds.ymin) <= tolerance or abs(y - bounds.ymax) <= tolerance):
            return True
    return False


def _cell(
    points: PointSet,
    owners: list[int],
    bounds: Bounds,
    tolerance: float,
    half_planes: Optional[dict] = None,
) -> tuple[Optional[VoronoiCell], Optional[str]]:
    arr = points.array()
    others = [i for i in range(len(arr)) if i not in owners]
    constraints = []
    for s in owners:
        for t in others:
            if half_planes is not None:
                constraints.append(half_planes[(s, t)])
            else:
                constraints.append(bisector(arr[s], arr[t]))

    polygon = bounds.polygon()
    for half_plane in constraints:
        polygon = clip_polygon(polygon, half_plane)
        if len(polygon) < 3:
            return None, None
    if polygon_area(polygon) <= 0.0:
        return None, None

    witness = polygon_centroid(polygon)
    margin = min(b - ax * witness[0] - ay * witness[1] for ax, ay, b in constraints)
    members = canonical(points.labels[i] for i in owners)
    if margin < tolerance:
        return None, f"Voronoi cell of {', '.join(members)} is degenerate (witness margin {margin:.3e}); excluded"
    return VoronoiCell(
        members=members,
        polygon=polygon,
        witness=witness,
        margin=margin,
        clipped=_on_bounds(polygon, bounds, tolerance),
    ), None


def voronoi_coalitions(
    points: PointSet,
    k: int = COALITION_SIZE,
    epsilon: float = DEFAULT_EPSILON,
) -> list[VoronoiCell]:
    """
    Every k-subset whose open order-k Voronoi region is nonempty, found by clipping
    a bounding square with the k*(n-k) bisector half-planes of the subset.
    """
    check_distinct(points)
    arr = points.array()
    n = len(arr)
    tolerance = epsilon * points.diameter()
    bounds = clipping_bounds(points)
    half_planes = {
        (s, t): bisector(arr[s], arr[t])
        for s in range(n) for t in range(n) if s != t
    }

    cells = []
    for owners in itertools.combinations(range(n), k):
        cell, problem = _cell(points, list(owners), bounds, tolerance, half_planes)
        if problem:
            warn(problem)
        if cell is not None:
            cells.append(cell)
    cells.sort(key=lambda cell: cell.members)
    return cells


def voronoi_cell(
    points: PointSet,
    members: Iterable[str],
    bounds: Optional[Bounds] = None,
    epsilon: float = DEFAULT_EPSILON,
) -> Optional[VoronoiCell]:
    """One coalition's cell clipped to `bounds`, or None if it has no interior there."""
    check_distinct(points)
    mask = points.subset_mask(members)
    owners = [i for i in range(len(points.labels)) if mask[i]]
    cell, _ = _cell(points, owners, bounds or clipping_bounds(points), epsilon * points.diameter())
    return cell


def nearest_members(points: PointSet, location: Point, k: int = COALITION_SIZE) -> Optional[tuple[str, ...]]:
    """The k strictly nearest labels to `location`, or None when the k-th distance is tied."""
    arr = points.array()
    d2 = ((arr - np.asarray(location)) ** 2).sum(axis=1)
    order = np.argsort(d2, kind='stable')
    if not d2[order[k - 1]] < d2[order[k]]:
        return None
    return canonical(points.labels[i] for i in order[:k])


def _candidate_normals(arr: np.ndarray) -> np.ndarray:
    normals = []
    for i, j in itertools.combinations(range(len(arr)), 2):
        d = arr[j] - arr[i]
        d = d / float(np.hypot(*d))
        perp = np.array([-d[1], d[0]])
        normals.extend([d, -d, perp, -perp])
    return np.asarray(normals)


def half_plane_coalitions(
    points: PointSet,
    k: int = COALITION_SIZE,
    epsilon: float = DEFAULT_EPSILON,
) -> list[SeparatingLine]:
    """
    Every k-subset strictly separable from its complement by a line, with the
    maximum-margin separating line.

    The widest separating slab between two planar point sets is normal either to a
    segment joining one point of each side or to a segment joining two points of
    the same side, so those directions are the whole candidate set.
    """
    check_distinct(points)
    arr = points.array()
    n = len(arr)
    tolerance = epsilon * points.diameter()
    normals = _candidate_normals(arr)
    projections = normals @ arr.T

    lines = []
    for owners in itertools.combinations(range(n), k):
        mask = np.zeros(n, dtype=bool)
        mask[list(owners)] = True
        inside = projections[:, mask].max(axis=1)
        outside = projections[:, ~mask].min(axis=1)
        gaps = outside - inside
        best = int(np.argmax(gaps))
        gap = float(gaps[best])
        if gap <= 0.0:
            continue
        members = canonical(points.labels[i] for i in owners)
        if gap / 2.0 < tolerance:
            warn(f"Half-plane coalition {', '.join(members)} separates only by {gap / 2.0:.3e}; excluded")
            continue
        lines.append(SeparatingLine(
            members=members,
            normal=(float(normals[best][0]), float(normals[best][1])),
            offset=float((inside[best] + outside[best]) / 2.0),
            margin=gap / 2.0,
        ))
    lines.sort(key=lambda line: line.members)
    return lines


def grid_box(points: PointSet) -> Bounds:
    """The bounding box of the points inflated on every side by its own diagonal."""
    arr = points.array()
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    diagonal = float(np.hypot(*(hi - lo)))
    return Bounds(xmin=lo[0] - diagonal, ymin=lo[1] - diagonal, xmax=hi[0] + diagonal, ymax=hi[1] + diagonal)


def oracle_voronoi_grid(points: PointSet, resolution: int, k: int = COALITION_SIZE) -> set[tuple[str, ...]]:
    """Brute force: the k-nearest sets seen at the nodes of a resolution x resolution grid."""
    if resolution < 64:
        raise ValueError("grid resolution must be at least 64")
    arr = points.array()
    box = grid_box(points)
    xs = np.linspace(box.xmin, box.xmax, resolution)
    ys = np.linspace(box.ymin, box.ymax, resolution)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    d2 = ((nodes[:, None, :] - arr[None, :, :]) ** 2).sum(axis=2)
    order = np.argsort(d2, axis=1, kind='stable')
    ranked = np.take_along_axis(d2, order, axis=1)
    strict = ranked[:, k - 1] < ranked[:, k]
    chosen = np.unique(np.sort(order[strict, :k], axis=1), axis=0)
    return {canonical(points.labels[i] for i in row) for row in chosen}


def _orientation(a: Point, b: Point, c: Point) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def convex_hull(points: Iterable[Point]) -> list[Point]:
    """Monotone chain hull, counterclockwise, collinear points dropped."""
    ordered = sorted(set(tuple(p) for p in points))
    if len(ordered) <= 2:
        return ordered
    lower: list[Point] = []
    for p in ordered:
        while len(lower) >= 2 and _orientation(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(ordered):
        while len(upper) >= 2 and _orientation(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    return (_orientation(a, b, p) == 0.0
            and min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _segments_touch(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    d1 = _orientation(q1, q2, p1)
    d2 = _orientation(q1, q2, p2)
    d3 = _orientation(p1, p2, q1)
    d4 = _orientation(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    return (_on_segment(p1, q1, q2) or _on_segment(p2, q1, q2)
            or _on_segment(q1, p1, p2) or _on_segment(q2, p1, p2))


def _in_hull(p: Point, hull: list[Point]) -> bool:
    if len(hull) == 1:
        return p == hull[0]
    if len(hull) == 2:
        return _on_segment(p, hull[0], hull[1])
    return all(_orientation(hull[i], hull[(i + 1) % len(hull)], p) >= 0.0 for i in range(len(hull)))


def _edges(hull: list[Point]) -> list[tuple[Point, Point]]:
    if len(hull) < 2:
        return []
    if len(hull) == 2:
        return [(hull[0], hull[1])]
    return [(hull[i], hull[(i + 1) % len(hull)]) for i in range(len(hull))]


def oracle_separable(members: Iterable[str], points: PointSet) -> bool:
    """True iff the convex hulls of the subset and of its complement are disjoint."""
    mask = points.subset_mask(members)
    inside = [tuple(points.coords[i]) for i in range(len(mask)) if mask[i]]
    outside = [tuple(points.coords[i]) for i in range(len(mask)) if not mask[i]]
    hull_in = convex_hull(inside)
    hull_out = convex_hull(outside)
    if any(_in_hull(p, hull_out) for p in hull_in) or any(_in_hull(p, hull_in) for p in hull_out):
        return False
    for a1, a2 in _edges(hull_in):
        for b1, b2 in _edges(hull_out):
            if _segments_touch(a1, a2, b1, b2):
                return False
    return True


def containment_exceptions(
    voting: Iterable[Iterable[str]],
    voronoi: Iterable[Iterable[str]],
    halfplane: Iterable[Iterable[str]],
) -> list[tuple[str, ...]]:
    """Coalitions that are both voting and half-plane coalitions but not Voronoi coalitions."""
    voronoi_sets = {canonical(m) for m in voronoi}
    both = {canonical(m) for m in voting} & {canonical(m) for m in halfplane}
    return sorted(both - voronoi_sets)


def both_models_contained(
    voting: Iterable[Iterable[str]],
    voronoi: Iterable[Iterable[str]],
    halfplane: Iterable[Iterable[str]],
) -> tuple[bool, list[tuple[str, ...]]]:
    exceptions = containment_exceptions(voting, voronoi, halfplane)
    return not exceptions, exceptions


def cells_to_json(cells: list[VoronoiCell]) -> str:
    return to_json([cell.model_dump(mode='json') for cell in cells])


def lines_to_json(lines: list[SeparatingLine]) -> str:
    return to_json([line.model_dump(mode='json') for line in lines])


def cells_to_csv(cells: list[VoronoiCell]) -> str:
    rows = [[";".join(c.members), repr(c.witness[0]), repr(c.witness[1]), repr(c.margin), c.clipped] for c in cells]
    return rows_to_csv(["members", "witness_x", "witness_y", "margin", "clipped"], rows)


def lines_to_csv(lines: list[SeparatingLine]) -> str:
    rows = [[";".join(l.members), repr(l.normal[0]), repr(l.normal[1]), repr(l.offset), repr(l.margin)] for l in lines]
    return rows_to_csv(["members", "normal_x", "normal_y", "offset", "margin"], rows)
