"""
Per-court pipeline runs, the aggregate accuracy tables, and SVG figures.
"""
import os
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel, ConfigDict

from agreement import DissimilarityMatrix, dissimilarity_matrix
from coalition_core import (
    Coalition,
    RankAssignment,
    annotate,
    canonical,
    extract_voting_coalitions,
    rank_justices,
)
from mds_embed import Embedding, classical_mds, leading_dimensions, ordering
from scdb_ingest import CourtSlice, restrict_terms
from spatial_geometry import (
    DEFAULT_EPSILON,
    Bounds,
    PointSet,
    SeparatingLine,
    VoronoiCell,
    clip_polygon,
    containment_exceptions,
    from_embedding,
    half_plane_coalitions,
    voronoi_cell,
    voronoi_coalitions,
)
from swing_analysis import (
    FifthVoteResult,
    MeanJusticeResult,
    agreement_rate,
    fifth_vote,
    mean_justice,
)
from utils import DataError, display_percent, fraction_text, log, percent, rows_to_csv, to_json, warn

script_dir = os.path.dirname(__file__)
templates_dir = os.path.join(script_dir, "templates")
templates = Environment(
    loader=FileSystemLoader(templates_dir),
    autoescape=True,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _num(value: float) -> str:
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


templates.filters["num"] = _num


class AnalysisSettings(BaseModel):
    anchor: Optional[Union[str, list[str]]] = None
    epsilon: float = DEFAULT_EPSILON
    per_term: bool = True


class CourtReport(BaseModel):
    """
    One court's accuracy summary, kept as integer counts so every accuracy is an exact fraction:
    explained = |voting & model| / |voting|, efficiency = |voting & model| / |model|.
    """
    court_id: str
    first_term: int
    last_term: int
    case_count: int = 0
    n_voting_coalitions: int
    max_disorder: Optional[int] = None
    voting_and_voronoi: int
    voronoi_count: int
    voting_and_halfplane: int
    halfplane_count: int
    mean_justice: str
    mean_justice_tie: bool = False
    term_mean_justices: dict[int, str] = {}

    @staticmethod
    def _ratio(numerator: int, denominator: int) -> Optional[Fraction]:
        return Fraction(numerator, denominator) if denominator else None

    @property
    def voronoi_explained(self) -> Optional[Fraction]:
        return self._ratio(self.voting_and_voronoi, self.n_voting_coalitions)

    @property
    def voronoi_efficiency(self) -> Optional[Fraction]:
        return self._ratio(self.voting_and_voronoi, self.voronoi_count)

    @property
    def halfplane_explained(self) -> Optional[Fraction]:
        return self._ratio(self.voting_and_halfplane, self.n_voting_coalitions)

    @property
    def halfplane_efficiency(self) -> Optional[Fraction]:
        return self._ratio(self.voting_and_halfplane, self.halfplane_count)

    def accuracies(self) -> dict[str, Optional[Fraction]]:
        return {
            "voronoi_explained": self.voronoi_explained,
            "voronoi_efficiency": self.voronoi_efficiency,
            "halfplane_explained": self.halfplane_explained,
            "halfplane_efficiency": self.halfplane_efficiency,
        }

    def to_json_dict(self) -> dict:
        data = self.model_dump(mode='json')
        data.update({name: fraction_text(value) for name, value in self.accuracies().items()})
        return data


class CourtAnalysis(BaseModel):
    court_id: str
    matrix: DissimilarityMatrix
    embedding_1d: Embedding
    embedding_2d: Embedding
    ordering: list[str]
    ranks: RankAssignment
    voting: list[Coalition]
    coalitions: list[Coalition]
    cells: list[VoronoiCell]
    lines: list[SeparatingLine]
    fifth_votes: list[FifthVoteResult]
    fifth_vote_agreement: Optional[str] = None
    mean: MeanJusticeResult
    term_means: dict[int, MeanJusticeResult] = {}
    containment_exceptions: list[tuple[str, ...]] = []
    report: CourtReport

    def points(self) -> PointSet:
        return from_embedding(self.embedding_2d)


class MinAccuracy(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    court_id: str
    voronoi: Optional[Fraction] = None
    halfplane: Optional[Fraction] = None


class TermMeanJustice(BaseModel):
    term: int
    court_id: str
    justice: str
    # the term's mean justice is also the whole court's mean justice
    court_mean: bool = False


def embed(court: CourtSlice, settings: AnalysisSettings) -> tuple[DissimilarityMatrix, Embedding]:
    matrix = dissimilarity_matrix(court)
    return matrix, classical_mds(matrix, dimension=2, anchor=settings.anchor)


def term_mean_justices(court: CourtSlice, settings: AnalysisSettings) -> dict[int, MeanJusticeResult]:
    """Mean justice of each term, from dissimilarities and MDS recomputed on that term alone."""
    results = {}
    for term in court.terms():
        try:
            _, embedding = embed(restrict_terms(court, term, term), settings)
            results[term] = mean_justice(embedding)
        except DataError as e:
            warn(f"Court '{court.label}', term {term}: no term-specific mean justice ({e})")
    return results


def analyze_court(court: CourtSlice, settings: Optional[AnalysisSettings] = None) -> CourtAnalysis:
    """Runs agreement, MDS, coalitions, geometry and swing analysis for one court."""
    settings = settings or AnalysisSettings()
    log(f"Analyzing court '{court.label}'")

    matrix, embedding_2d = embed(court, settings)
    embedding_1d = leading_dimensions(embedding_2d, 1)
    ranks = rank_justices(embedding_1d)
    voting = extract_voting_coalitions(court)

    points = from_embedding(embedding_2d)
    cells = voronoi_coalitions(points, epsilon=settings.epsilon)
    lines = half_plane_coalitions(points, epsilon=settings.epsilon)
    voronoi_sets = [cell.members for cell in cells]
    halfplane_sets = [line.members for line in lines]
    coalitions = annotate(voting, ranks, voronoi_sets, halfplane_sets)
    voting_annotated = [c for c in coalitions if c.is_voting]

    fifth_votes = [fifth_vote(embedding_2d, c.members) for c in voting_annotated]
    mean = mean_justice(embedding_2d)
    term_means = term_mean_justices(court, settings) if settings.per_term else {}

    voting_sets = {c.members for c in voting}
    terms = court.terms()
    report = CourtReport(
        court_id=court.label,
        first_term=terms[0],
        last_term=terms[-1],
        case_count=len(court.cases),
        n_voting_coalitions=len(voting),
        max_disorder=max((c.disorder for c in voting_annotated), default=None),
        voting_and_voronoi=len(voting_sets & set(voronoi_sets)),
        voronoi_count=len(cells),
        voting_and_halfplane=len(voting_sets & set(halfplane_sets)),
        halfplane_count=len(lines),
        mean_justice=mean.justice,
        mean_justice_tie=mean.tie,
        term_mean_justices={term: result.justice for term, result in term_means.items()},
    )
    for name, value in report.accuracies().items():
        if value is None:
            warn(f"Court '{court.label}': {name} has a zero denominator; reported as n/a")

    return CourtAnalysis(
        court_id=court.label,
        matrix=matrix,
        embedding_1d=embedding_1d,
        embedding_2d=embedding_2d,
        ordering=ordering(embedding_1d),
        ranks=ranks,
        voting=voting_annotated,
        coalitions=coalitions,
        cells=cells,
        lines=lines,
        fifth_votes=fifth_votes,
        fifth_vote_agreement=fraction_text(agreement_rate(fifth_votes)) if fifth_votes else None,
        mean=mean,
        term_means=term_means,
        containment_exceptions=containment_exceptions(voting_sets, voronoi_sets, halfplane_sets),
        report=report,
    )


def court_report(court: CourtSlice, settings: Optional[AnalysisSettings] = None) -> CourtReport:
    return analyze_court(court, settings).report


def analysis_to_json(analysis: CourtAnalysis) -> str:
    data = analysis.model_dump(mode='json')
    data["report"] = analysis.report.to_json_dict()
    return to_json(data)


def min_accuracy_series(reports: Sequence[CourtReport]) -> list[MinAccuracy]:
    """Per court, the smaller of the two accuracy rates of each model."""
    if not reports:
        raise DataError("No court reports given.")

    def smaller(first: Optional[Fraction], second: Optional[Fraction]) -> Optional[Fraction]:
        if first is None or second is None:
            return None
        return min(first, second)

    return [
        MinAccuracy(
            court_id=report.court_id,
            voronoi=smaller(report.voronoi_explained, report.voronoi_efficiency),
            halfplane=smaller(report.halfplane_explained, report.halfplane_efficiency),
        )
        for report in reports
    ]


def mean_accuracies(reports: Sequence[CourtReport]) -> tuple[Optional[float], ...]:
    """
    Means, in percent, of the Voronoi explained, Voronoi efficiency, half-plane
    explained and half-plane efficiency columns. Courts with an n/a entry are left out
    of that column's mean.
    """
    if not reports:
        raise DataError("No court reports given.")
    columns = ["voronoi_explained", "voronoi_efficiency", "halfplane_explained", "halfplane_efficiency"]
    means = []
    for column in columns:
        values = [report.accuracies()[column] for report in reports]
        present = [v for v in values if v is not None]
        if len(present) < len(values):
            warn(f"{column}: {len(values) - len(present)} court(s) with n/a left out of the mean")
        means.append(percent(sum(present, Fraction(0)) / len(present)) if present else None)
    return tuple(means)


def term_table(reports: Sequence[CourtReport]) -> list[TermMeanJustice]:
    """One mean justice per term; a term shared by two courts is taken from the earlier court."""
    rows: dict[int, TermMeanJustice] = {}
    for report in sorted(reports, key=lambda r: (r.first_term, r.last_term, r.court_id)):
        for term, justice in sorted(report.term_mean_justices.items()):
            if term not in rows:
                rows[term] = TermMeanJustice(
                    term=term, court_id=report.court_id, justice=justice, court_mean=justice == report.mean_justice,
                )
    return [rows[term] for term in sorted(rows)]


def mean_justice_strength(report: CourtReport) -> Optional[Fraction]:
    """Share of the court's terms whose own mean justice is the court's mean justice."""
    if not report.term_mean_justices:
        return None
    same = sum(1 for justice in report.term_mean_justices.values() if justice == report.mean_justice)
    return Fraction(same, len(report.term_mean_justices))


def _pair(first: Optional[Fraction], second: Optional[Fraction]) -> str:
    return f"{display_percent(first)}, {display_percent(second)}"


def accuracy_table_csv(reports: Sequence[CourtReport]) -> str:
    rows = [
        [
            report.court_id,
            f"{report.first_term}-{report.last_term}",
            report.n_voting_coalitions,
            "n/a" if report.max_disorder is None else report.max_disorder,
            _pair(report.voronoi_explained, report.voronoi_efficiency),
            _pair(report.halfplane_explained, report.halfplane_efficiency),
            report.mean_justice,
        ]
        for report in reports
    ]
    headers = ["court", "terms", "voting_coalitions", "max_disorder", "voronoi_accuracy", "halfplane_accuracy", "mean_justice"]
    return rows_to_csv(headers, rows)


def term_table_csv(rows: Sequence[TermMeanJustice]) -> str:
    return rows_to_csv(
        ["term", "court", "mean_justice", "court_mean"],
        [[r.term, r.court_id, r.justice, r.court_mean] for r in rows],
    )


def reports_to_json(reports: Sequence[CourtReport]) -> str:
    means = mean_accuracies(reports) if reports else ()
    return to_json({
        "courts": [
            {**report.to_json_dict(), "mean_justice_strength": fraction_text(mean_justice_strength(report))}
            for report in reports
        ],
        "mean_accuracies": list(means),
    })


# --- SVG rendering ---

class Viewport(BaseModel):
    """Maps data coordinates onto an SVG canvas with equal x and y scale (y up)."""
    bounds: Bounds
    width: int = 640
    height: int = 480
    padding: int = 40

    @property
    def scale(self) -> float:
        span_x = self.bounds.xmax - self.bounds.xmin
        span_y = self.bounds.ymax - self.bounds.ymin
        return min((self.width - 2 * self.padding) / span_x, (self.height - 2 * self.padding) / span_y)

    def project(self, point: Sequence[float]) -> tuple[float, float]:
        center_x = (self.bounds.xmin + self.bounds.xmax) / 2.0
        center_y = (self.bounds.ymin + self.bounds.ymax) / 2.0
        x = self.width / 2.0 + (point[0] - center_x) * self.scale
        y = self.height / 2.0 - (point[1] - center_y) * self.scale
        return x, y

    def points_attr(self, polygon: Iterable[Sequence[float]]) -> str:
        return " ".join(f"{_num(x)},{_num(y)}" for x, y in (self.project(p) for p in polygon))


def view_bounds(coords: Iterable[Sequence[float]], margin: float = 0.15) -> Bounds:
    arr = np.asarray(list(coords), dtype=np.float64).reshape(-1, 2)
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    span = float((hi - lo).max())
    pad = margin * span if span > 0 else 1.0
    return Bounds(xmin=lo[0] - pad, ymin=lo[1] - pad, xmax=hi[0] + pad, ymax=hi[1] + pad)


def _seeds(viewport: Viewport, points: PointSet, members: Iterable[str] = (), upper_case: bool = False) -> list[dict]:
    chosen = set(members)
    seeds = []
    for label, coords in zip(points.labels, points.coords):
        x, y = viewport.project(coords)
        member = label in chosen
        seeds.append({
            "x": x,
            "y": y,
            "label": label.upper() if upper_case and member else label,
            "member": member,
        })
    return seeds


def render_voronoi_svg(
    points: PointSet,
    cells: Sequence[VoronoiCell],
    highlights: Sequence[Iterable[str]] = (),
    upper_case_highlight: bool = False,
    title: str = "Order-5 Voronoi diagram",
) -> str:
    """
    Cell outlines of the order-5 diagram with one filled polygon per highlighted
    coalition. Every highlighted coalition must own a cell. `upper_case_highlight`
    capitalizes the labels of the highlighted members, the single-case layout.
    """
    cell_by_members = {cell.members: cell for cell in cells}
    wanted = [canonical(members) for members in highlights]
    for members in wanted:
        if members not in cell_by_members:
            raise DataError(f"{', '.join(members)} is not a Voronoi coalition; nothing to highlight.")

    bounds = view_bounds(list(points.coords) + [cell_by_members[m].witness for m in wanted])
    viewport = Viewport(bounds=bounds)

    outlines = []
    for cell in cells:
        visible = voronoi_cell(points, cell.members, bounds=bounds)
        if visible is not None:
            outlines.append(viewport.points_attr(visible.polygon))

    fills = []
    for index, members in enumerate(wanted):
        visible = voronoi_cell(points, members, bounds=bounds)
        polygon = visible.polygon if visible is not None else cell_by_members[members].polygon
        fills.append({
            "points": viewport.points_attr(polygon),
            "color": PALETTE[index % len(PALETTE)],
            "label": ", ".join(members),
        })

    members = set(wanted[0]) if upper_case_highlight and wanted else set()
    template = templates.get_template("voronoi.svg.j2")
    return template.render(
        width=viewport.width,
        height=viewport.height,
        title=title,
        fills=fills,
        outlines=outlines,
        seeds=_seeds(viewport, points, members, upper_case=upper_case_highlight),
    )


def render_circles_svg(embedding: Embedding, result: FifthVoteResult, title: str = "Circles of influence") -> str:
    points = from_embedding(embedding)
    focal = result.focal
    extent = list(points.coords)
    for center, radius in ((focal.majority_focal, result.majority_radius), (focal.minority_focal, result.minority_radius)):
        extent.extend([(center[0] - radius, center[1] - radius), (center[0] + radius, center[1] + radius)])
    viewport = Viewport(bounds=view_bounds(extent, margin=0.05))

    def marker(center: Sequence[float], radius: float = 0.0) -> dict:
        x, y = viewport.project(center)
        return {"x": x, "y": y, "r": radius * viewport.scale}

    notes = []
    if result.majority_tie:
        notes.append(f"tie for farthest from the majority focal point ({result.by_majority} chosen)")
    if result.minority_tie:
        notes.append(f"tie for nearest to the minority focal point ({result.by_minority} chosen)")

    template = templates.get_template("circles.svg.j2")
    return template.render(
        width=viewport.width,
        height=viewport.height,
        title=title,
        majority=marker(focal.majority_focal, result.majority_radius),
        minority=marker(focal.minority_focal, result.minority_radius),
        center=marker(focal.court_center),
        seeds=_seeds(viewport, points, result.members),
        by_majority=result.by_majority,
        by_minority=result.by_minority,
        tie_note="; ".join(notes),
    )


def render_1d_svg(embedding: Embedding, title: str = "One-dimensional MDS positions") -> str:
    """Number line of dimension 1; labels alternate above and below the axis."""
    width, height, padding = 640, 160, 40
    axis_y = height / 2.0
    positions = sorted((coords[0], name) for name, coords in zip(embedding.roster, embedding.coords))
    low, high = positions[0][0], positions[-1][0]
    span = high - low if high > low else 1.0

    ticks = []
    for index, (value, name) in enumerate(positions):
        x = padding + (value - low) / span * (width - 2 * padding) if high > low else width / 2.0
        ticks.append({
            "x": x,
            "label": name,
            "label_y": axis_y - 14 if index % 2 == 0 else axis_y + 24,
        })

    template = templates.get_template("number_line.svg.j2")
    return template.render(
        width=width,
        height=height,
        title=title,
        left=padding,
        right=width - padding,
        axis_y=axis_y,
        ticks=ticks,
    )


def render_halfplane_svg(points: PointSet, line: SeparatingLine, title: str = "Half-plane coalition") -> str:
    viewport = Viewport(bounds=view_bounds(points.coords))
    bounds = viewport.bounds
    nx_, ny_ = line.normal
    side = clip_polygon(bounds.polygon(), (nx_, ny_, line.offset))

    # the separating line, long enough to cross the whole view
    center = np.array([(bounds.xmin + bounds.xmax) / 2.0, (bounds.ymin + bounds.ymax) / 2.0])
    normal = np.array([nx_, ny_])
    foot = center + (line.offset - float(normal @ center)) * normal
    direction = np.array([-ny_, nx_])
    reach = float(np.hypot(bounds.xmax - bounds.xmin, bounds.ymax - bounds.ymin))
    x1, y1 = viewport.project(foot - reach * direction)
    x2, y2 = viewport.project(foot + reach * direction)

    template = templates.get_template("halfplane.svg.j2")
    return template.render(
        width=viewport.width,
        height=viewport.height,
        title=title,
        side=viewport.points_attr(side),
        color=PALETTE[0],
        line={"x1": x1, "y1": y1, "x2": x2, "y2": y2},
        seeds=_seeds(viewport, points, line.members),
    )


def render_min_accuracy_svg(series: Sequence[MinAccuracy], title: str = "Minimum accuracy per natural court") -> str:
    """Plus markers for the Voronoi model, triangles for the half-plane model."""
    width, height = 720, 420
    left, right, top, bottom = 60, width - 20, 30, height - 110
    step = (right - left) / max(len(series), 1)

    def y_of(value: Optional[Fraction]) -> Optional[float]:
        if value is None:
            return None
        return bottom - float(value) * (bottom - top)

    courts = [
        {
            "x": left + step * (index + 0.5),
            "label": point.court_id,
            "voronoi": y_of(point.voronoi),
            "halfplane": y_of(point.halfplane),
        }
        for index, point in enumerate(series)
    ]
    levels = [{"y": y_of(Fraction(level, 100)), "label": f"{level}%"} for level in range(0, 101, 20)]

    template = templates.get_template("min_accuracy.svg.j2")
    return template.render(
        width=width,
        height=height,
        title=title,
        left=left,
        right=right,
        top=top,
        bottom=bottom,
        levels=levels,
        courts=courts,
    )
