from fractions import Fraction
import json

import pytest

from conftest import LINE_COURT, LINE_NAMES
from report_render import (
    AnalysisSettings,
    CourtReport,
    accuracy_table_csv,
    analysis_to_json,
    analyze_court,
    mean_accuracies,
    mean_justice_strength,
    min_accuracy_series,
    render_1d_svg,
    render_circles_svg,
    render_halfplane_svg,
    render_min_accuracy_svg,
    render_voronoi_svg,
    reports_to_json,
    term_table,
    term_table_csv,
)
from utils import DataError, display_percent

LEFT = tuple(LINE_NAMES[:5])
RIGHT = tuple(LINE_NAMES[4:])

# court, voting, voting & voronoi, voronoi, voting & half-plane, half-plane
PUBLISHED_COUNTS = [
    ("1946-48", 28, 10, 20, 7, 10),
    ("1949-52", 26, 8, 16, 6, 14),
    ("1953", 8, 3, 19, 3, 11),
    ("1954-56", 8, 6, 21, 5, 9),
    ("1956", 5, 4, 19, 4, 11),
    ("1956-58", 10, 6, 19, 4, 10),
    ("1958-61", 18, 8, 20, 6, 10),
    ("1962-64", 18, 6, 18, 6, 15),
    ("1965-66", 12, 7, 18, 7, 12),
    ("1967-68", 6, 3, 19, 1, 12),
    ("1969-70", 15, 5, 19, 5, 10),
    ("1971-75", 23, 10, 20, 9, 10),
    ("1975-80", 33, 11, 19, 10, 11),
    ("1981-85", 33, 11, 19, 9, 11),
    ("1986", 13, 5, 19, 5, 11),
    ("1987-89", 19, 8, 18, 6, 10),
    ("1990", 15, 9, 19, 9, 12),
    ("1991-92", 20, 8, 18, 8, 12),
    ("1993", 6, 4, 18, 4, 11),
    ("1994-2004", 38, 13, 18, 11, 11),
    ("2005", 2, 2, 21, 2, 12),
    ("2005-08", 14, 6, 19, 6, 10),
    ("2009", 8, 4, 18, 4, 10),
    ("2009-15", 16, 8, 20, 5, 10),
    ("2016", 2, 2, 16, 2, 14),
]


def _report(court_id, voting, a, m, b, h, first=2000, last=2000, **extra) -> CourtReport:
    return CourtReport(
        court_id=court_id, first_term=first, last_term=last,
        n_voting_coalitions=voting, voting_and_voronoi=a, voronoi_count=m,
        voting_and_halfplane=b, halfplane_count=h, mean_justice="X", **extra,
    )


@pytest.fixture
def line_analysis(line_court):
    return analyze_court(line_court, AnalysisSettings(anchor="Irving"))


def test_line_court_report(line_analysis):
    report = line_analysis.report
    assert report.court_id == LINE_COURT
    assert (report.first_term, report.last_term, report.case_count) == (2000, 2001, 9)
    assert report.n_voting_coalitions == 2
    assert report.max_disorder == 0
    assert (report.voting_and_voronoi, report.voronoi_count) == (2, 5)
    assert (report.voting_and_halfplane, report.halfplane_count) == (2, 2)
    assert report.voronoi_explained == 1
    assert report.voronoi_efficiency == Fraction(2, 5)
    assert report.halfplane_explained == report.halfplane_efficiency == 1
    assert report.mean_justice == "Evans"
    assert set(report.term_mean_justices) == {2000, 2001}


def test_line_court_analysis_details(line_analysis):
    assert line_analysis.ordering == LINE_NAMES
    assert [c.members for c in line_analysis.voting] == [LEFT, RIGHT]
    assert all(c.is_voronoi and c.is_halfplane for c in line_analysis.voting)
    assert line_analysis.fifth_vote_agreement == "1/2"
    assert line_analysis.containment_exceptions == []
    assert len(line_analysis.coalitions) == 5


def test_analysis_json_uses_exact_fractions(line_analysis):
    data = json.loads(analysis_to_json(line_analysis))
    assert data["report"]["voronoi_efficiency"] == "2/5"
    assert data["report"]["halfplane_explained"] == "1/1"


def test_per_term_can_be_switched_off(line_court):
    report = analyze_court(line_court, AnalysisSettings(anchor="Irving", per_term=False)).report
    assert report.term_mean_justices == {}


def test_accuracy_table_row(line_analysis):
    lines = accuracy_table_csv([line_analysis.report]).splitlines()
    assert lines[0] == "court,terms,voting_coalitions,max_disorder,voronoi_accuracy,halfplane_accuracy,mean_justice"
    assert lines[1] == f'{LINE_COURT},2000-2001,2,0,"100%, 40%","100%, 100%",Evans'


def test_mean_accuracies_of_published_counts():
    reports = [_report(*row) for row in PUBLISHED_COUNTS]
    means = mean_accuracies(reports)
    assert means == pytest.approx((50.9, 35.6, 45.2, 52.6), abs=0.3)


def test_zero_denominators_are_not_available(capsys):
    report = _report("empty", 0, 0, 4, 0, 3)
    assert report.voronoi_explained is None
    assert display_percent(report.halfplane_explained) == "n/a"
    means = mean_accuracies([report, _report("full", 2, 1, 4, 1, 2)])
    assert means[0] == pytest.approx(50.0)
    assert means[1] == pytest.approx(12.5)
    assert "left out of the mean" in capsys.readouterr().err


@pytest.mark.parametrize("value, text", [
    (Fraction(1, 3), "33.3%"),
    (Fraction(2, 5), "40%"),
    (Fraction(1, 400), "0.2%"),
    (Fraction(3, 400), "0.8%"),
    (None, "n/a"),
])
def test_display_rounding(value, text):
    assert display_percent(value) == text


def test_min_accuracy_series(line_analysis):
    series = min_accuracy_series([line_analysis.report, _report("none", 0, 0, 3, 0, 1)])
    assert (series[0].voronoi, series[0].halfplane) == (Fraction(2, 5), Fraction(1))
    assert series[1].voronoi is None
    assert "<svg" in render_min_accuracy_svg(series)


def test_term_table_takes_shared_term_from_earlier_court():
    early = _report("A", 1, 1, 1, 1, 1, first=2004, last=2005, term_mean_justices={2004: "X", 2005: "O'Connor"})
    late = _report("B", 1, 1, 1, 1, 1, first=2005, last=2006, term_mean_justices={2005: "Roberts", 2006: "Kennedy"})
    rows = term_table([late, early])
    assert [(r.term, r.court_id, r.justice, r.court_mean) for r in rows] == [
        (2004, "A", "X", True), (2005, "A", "O'Connor", False), (2006, "B", "Kennedy", False),
    ]
    assert term_table_csv(rows).splitlines()[:2] == ["term,court,mean_justice,court_mean", "2004,A,X,True"]


def test_mean_justice_strength():
    report = _report("A", 1, 1, 1, 1, 1, term_mean_justices={1: "X", 2: "Y", 3: "X"})
    assert mean_justice_strength(report) == Fraction(2, 3)
    assert mean_justice_strength(_report("B", 1, 1, 1, 1, 1)) is None


def test_reports_json(line_analysis):
    data = json.loads(reports_to_json([line_analysis.report]))
    assert data["courts"][0]["court_id"] == LINE_COURT
    assert data["mean_accuracies"] == [100.0, 40.0, 100.0, 100.0]
    assert "mean_justice_strength" in data["courts"][0]


def test_reports_json_carries_mean_justice_strength():
    report = _report("A", 1, 1, 1, 1, 1, term_mean_justices={1: "X", 2: "Y"})
    assert json.loads(reports_to_json([report]))["courts"][0]["mean_justice_strength"] == "1/2"


def test_voronoi_svg_is_deterministic_and_highlights_each_coalition(line_analysis):
    points = line_analysis.points()
    first = render_voronoi_svg(points, line_analysis.cells, [LEFT, RIGHT])
    second = render_voronoi_svg(points, line_analysis.cells, [LEFT, RIGHT])
    assert first == second
    assert first.count('class="highlight"') == 2
    assert first.count('class="cell"') == 5


def test_single_case_layout_capitalizes_members(line_analysis):
    svg = render_voronoi_svg(line_analysis.points(), line_analysis.cells, [LEFT], upper_case_highlight=True)
    assert ">ADAMS<" in svg
    assert ">Irving<" in svg


def test_highlight_must_own_a_cell(line_analysis):
    with pytest.raises(DataError, match="not a Voronoi coalition"):
        render_voronoi_svg(line_analysis.points(), line_analysis.cells, [("Adams", "Clark", "Evans", "Grant", "Irving")])


def test_number_line_has_one_tick_per_justice(line_analysis):
    svg = render_1d_svg(line_analysis.embedding_1d)
    assert svg.count('class="tick"') == 9
    for name in LINE_NAMES:
        assert f">{name}<" in svg


def test_circles_and_halfplane_figures(line_analysis):
    result = line_analysis.fifth_votes[0]
    circles = render_circles_svg(line_analysis.embedding_2d, result)
    assert "<svg" in circles and result.by_minority in circles
    line_svg = render_halfplane_svg(line_analysis.points(), line_analysis.lines[0])
    assert "<line" in line_svg


def test_every_figure_is_byte_identical_across_calls(line_analysis):
    points = line_analysis.points()
    result = line_analysis.fifth_votes[0]
    renders = [
        lambda: render_1d_svg(line_analysis.embedding_1d),
        lambda: render_circles_svg(line_analysis.embedding_2d, result),
        lambda: render_halfplane_svg(points, line_analysis.lines[0]),
        lambda: render_min_accuracy_svg(min_accuracy_series([line_analysis.report])),
    ]
    for render in renders:
        assert render().encode("utf-8") == render().encode("utf-8")
