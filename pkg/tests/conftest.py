import io
import os

import numpy as np
import pytest

from scdb_ingest import CourtSelector, parse_votes, select_court
from spatial_geometry import PointSet

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SNAPSHOT_PATH = os.path.join(ROOT, "data", "scdb_snapshot.csv")

# Alphabetical order is also left-to-right order on the line court.
LINE_NAMES = ["Adams", "Baker", "Clark", "Davis", "Evans", "Foster", "Grant", "Hughes", "Irving"]
LINE_COURT = "2000-2001"


def line_court_rows(names=LINE_NAMES):
    """
    Nine justices on a line. For k = 5..8 one case has majority = the k leftmost
    justices and one has majority = the k rightmost, so every gap between
    neighbours splits exactly one case per side and d(i, j) = |i - j| / 9 with
    the unanimous case. One extra case has a missing vote and is excluded.
    """
    cases = []
    for k in range(5, 9):
        cases.append((f"L{k}", 2000, set(range(1, k + 1))))
        cases.append((f"R{k}", 2001, set(range(10 - k, 10))))
    cases.append(("U", 2001, set(range(1, 10))))

    rows = []
    for case_id, term, majority in cases:
        for justice_id, name in enumerate(names, start=1):
            code = 2 if justice_id in majority else 1
            rows.append([case_id, term, LINE_COURT, justice_id, name, code])
    for justice_id, name in enumerate(names, start=1):
        rows.append(["M", 2001, LINE_COURT, justice_id, name, "" if justice_id == 9 else 2])
    return rows


def line_court_csv(names=LINE_NAMES) -> str:
    header = "case_id,term,natural_court_id,justice_id,justice_name,majority_code\n"
    return header + "".join(",".join(str(v) for v in row) + "\n" for row in line_court_rows(names))


@pytest.fixture
def line_table():
    return parse_votes(io.BytesIO(line_court_csv().encode("utf-8")))


@pytest.fixture
def line_court(line_table):
    return select_court(line_table, CourtSelector(natural_court_id=LINE_COURT))


@pytest.fixture
def line_csv_path(tmp_path):
    path = tmp_path / "votes.csv"
    path.write_text(line_court_csv(), encoding="utf-8")
    return str(path)


def random_point_set(rng: np.random.Generator, n: int = 9) -> PointSet:
    coords = rng.normal(size=(n, 2))
    return PointSet(labels=[f"J{i + 1}" for i in range(n)], coords=[tuple(map(float, c)) for c in coords])


def regular_polygon(n: int = 9, radius: float = 1.0) -> PointSet:
    angles = 2 * np.pi * np.arange(n) / n
    return PointSet(
        labels=[f"P{i}" for i in range(n)],
        coords=[(radius * float(np.cos(a)), radius * float(np.sin(a))) for a in angles],
    )


snapshot = pytest.mark.skipif(
    not os.path.exists(SNAPSHOT_PATH),
    reason="data/scdb_snapshot.csv not present; run build_snapshot.py on an upstream release",
)


# 2009-2015 natural court, left to right on dimension 1
ORDER_2009 = ["Ginsburg", "Sotomayor", "Breyer", "Kagan", "Kennedy", "Roberts", "Scalia", "Alito", "Thomas"]

# majorities of its 5-to-4 decisions, numbered (1)..(16) in this order
VOTING_2009 = [
    ("Alito", "Breyer", "Ginsburg", "Kagan", "Kennedy"),
    ("Alito", "Breyer", "Ginsburg", "Roberts", "Sotomayor"),
    ("Alito", "Breyer", "Kennedy", "Roberts", "Sotomayor"),
    ("Alito", "Breyer", "Kennedy", "Roberts", "Thomas"),
    ("Alito", "Breyer", "Roberts", "Scalia", "Thomas"),
    ("Alito", "Kennedy", "Roberts", "Scalia", "Thomas"),
    ("Alito", "Roberts", "Scalia", "Sotomayor", "Thomas"),
    ("Breyer", "Ginsburg", "Kagan", "Kennedy", "Sotomayor"),
    ("Breyer", "Ginsburg", "Kagan", "Roberts", "Scalia"),
    ("Breyer", "Ginsburg", "Kagan", "Roberts", "Sotomayor"),
    ("Breyer", "Ginsburg", "Kagan", "Sotomayor", "Thomas"),
    ("Breyer", "Kagan", "Kennedy", "Roberts", "Sotomayor"),
    ("Ginsburg", "Kagan", "Kennedy", "Roberts", "Scalia"),
    ("Ginsburg", "Kagan", "Kennedy", "Scalia", "Sotomayor"),
    ("Ginsburg", "Kagan", "Scalia", "Sotomayor", "Thomas"),
    ("Kagan", "Kennedy", "Scalia", "Sotomayor", "Thomas"),
]

# its Voronoi coalitions with their disorder scores
VORONOI_2009 = [
    (("Alito", "Breyer", "Kagan", "Kennedy", "Roberts"), 9),
    (("Alito", "Breyer", "Kennedy", "Roberts", "Scalia"), 6),
    (("Alito", "Breyer", "Kennedy", "Roberts", "Sotomayor"), 9),
    (("Alito", "Breyer", "Kennedy", "Roberts", "Thomas"), 4),
    (("Alito", "Kagan", "Kennedy", "Roberts", "Scalia"), 5),
    (("Alito", "Kagan", "Roberts", "Scalia", "Thomas"), 1),
    (("Alito", "Kennedy", "Roberts", "Scalia", "Thomas"), 0),
    (("Breyer", "Ginsburg", "Kagan", "Kennedy", "Sotomayor"), 0),
    (("Breyer", "Ginsburg", "Kagan", "Scalia", "Sotomayor"), 2),
    (("Breyer", "Ginsburg", "Kennedy", "Roberts", "Sotomayor"), 2),
    (("Breyer", "Kagan", "Kennedy", "Roberts", "Scalia"), 10),
    (("Breyer", "Kagan", "Kennedy", "Roberts", "Sotomayor"), 5),
    (("Ginsburg", "Kagan", "Kennedy", "Roberts", "Scalia"), 8),
    (("Ginsburg", "Kagan", "Kennedy", "Roberts", "Sotomayor"), 3),
    (("Ginsburg", "Kagan", "Kennedy", "Scalia", "Sotomayor"), 4),
    (("Ginsburg", "Kagan", "Kennedy", "Scalia", "Thomas"), 9),
    (("Ginsburg", "Kagan", "Roberts", "Scalia", "Thomas"), 8),
    (("Ginsburg", "Kagan", "Scalia", "Sotomayor", "Thomas"), 8),
    (("Kagan", "Kennedy", "Roberts", "Scalia", "Sotomayor"), 9),
    (("Kagan", "Kennedy", "Roberts", "Scalia", "Thomas"), 4),
]

# its half-plane coalitions with their disorder scores
HALFPLANE_2009 = [
    (("Alito", "Breyer", "Ginsburg", "Kennedy", "Sotomayor"), 4),
    (("Alito", "Breyer", "Kennedy", "Roberts", "Sotomayor"), 9),
    (("Alito", "Breyer", "Kennedy", "Roberts", "Thomas"), 4),
    (("Alito", "Kagan", "Roberts", "Scalia", "Thomas"), 1),
    (("Alito", "Kennedy", "Roberts", "Scalia", "Thomas"), 0),
    (("Breyer", "Ginsburg", "Kagan", "Kennedy", "Sotomayor"), 0),
    (("Breyer", "Ginsburg", "Kagan", "Scalia", "Sotomayor"), 2),
    (("Breyer", "Ginsburg", "Kennedy", "Roberts", "Sotomayor"), 2),
    (("Ginsburg", "Kagan", "Roberts", "Scalia", "Thomas"), 8),
    (("Ginsburg", "Kagan", "Scalia", "Sotomayor", "Thomas"), 8),
]
