"""Focal points, the decisive fifth vote of a coalition, and the court's mean justice."""
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel

from coalition_core import COALITION_SIZE, canonical
from mds_embed import Embedding
from scdb_ingest import COURT_SIZE, DISSENT, MAJORITY, CourtSlice
from utils import DataError, to_json, warn

# distances closer than this (relative to the configuration diameter) are ties
DISTANCE_TIE = 1e-12


class FocalPoints(BaseModel):
    majority_focal: tuple[float, ...]
    minority_focal: tuple[float, ...]
    court_center: tuple[float, ...]


class FifthVoteResult(BaseModel):
    members: tuple[str, ...]
    by_majority: str
    by_minority: str
    agree: bool
    majority_radius: float
    minority_radius: float
    majority_tie: bool = False
    minority_tie: bool = False
    focal: FocalPoints
    case_id: Optional[str] = None


class MeanJusticeResult(BaseModel):
    justice: str
    distance: float
    court_center: tuple[float, ...]
    tie: bool = False


def _split(embedding: Embedding, members: Iterable[str]) -> tuple[tuple[str, ...], np.ndarray, np.ndarray]:
    coalition = canonical(members)
    unknown = set(coalition) - set(embedding.roster)
    if len(coalition) != COALITION_SIZE or len(set(coalition)) != COALITION_SIZE or unknown:
        raise DataError(f"Not a five-justice coalition of this roster: {', '.join(coalition)}")
    points = embedding.as_array()
    inside = np.array([name in coalition for name in embedding.roster])
    return coalition, points[inside], points[~inside]


def _scale(embedding: Embedding) -> float:
    points = embedding.as_array()
    diff = points[:, None, :] - points[None, :, :]
    return max(float(np.sqrt((diff * diff).sum(axis=2)).max()), 1.0)


def _pick(names: list[str], distances: np.ndarray, farthest: bool, tolerance: float) -> tuple[str, float, bool]:
    """Extreme distance with name-ascending tie break; reports whether a tie occurred."""
    target = float(distances.max() if farthest else distances.min())
    tied = sorted(name for name, d in zip(names, distances) if abs(float(d) - target) <= tolerance)
    return tied[0], target, len(tied) > 1


def focal_points(embedding: Embedding, members: Iterable[str]) -> FocalPoints:
    _, majority, minority = _split(embedding, members)
    return FocalPoints(
        majority_focal=tuple(float(v) for v in majority.mean(axis=0)),
        minority_focal=tuple(float(v) for v in minority.mean(axis=0)),
        court_center=tuple(float(v) for v in embedding.as_array().mean(axis=0)),
    )


def fifth_vote(embedding: Embedding, members: Iterable[str], case_id: Optional[str] = None) -> FifthVoteResult:
    """
    The majority-perspective fifth vote is the member farthest from the majority
    focal point; the minority-perspective fifth vote is the member nearest the
    minority focal point.
    """
    coalition, majority, _ = _split(embedding, members)
    focal = focal_points(embedding, coalition)
    names = [name for name in embedding.roster if name in coalition]
    tolerance = DISTANCE_TIE * _scale(embedding)

    from_majority = np.linalg.norm(majority - np.asarray(focal.majority_focal), axis=1)
    from_minority = np.linalg.norm(majority - np.asarray(focal.minority_focal), axis=1)
    by_majority, majority_radius, majority_tie = _pick(names, from_majority, True, tolerance)
    by_minority, minority_radius, minority_tie = _pick(names, from_minority, False, tolerance)

    label = ", ".join(coalition) if case_id is None else f"case {case_id}"
    if majority_tie:
        warn(f"Fifth vote ({label}): tie for farthest from the majority focal point; chose {by_majority}")
    if minority_tie:
        warn(f"Fifth vote ({label}): tie for nearest to the minority focal point; chose {by_minority}")
    if minority_radius <= tolerance:
        warn(f"Fifth vote ({label}): {by_minority} sits on the minority focal point")

    return FifthVoteResult(
        members=coalition,
        by_majority=by_majority,
        by_minority=by_minority,
        agree=by_majority == by_minority,
        majority_radius=majority_radius,
        minority_radius=minority_radius,
        majority_tie=majority_tie,
        minority_tie=minority_tie,
        focal=focal,
        case_id=case_id,
    )


def mean_justice(embedding: Embedding) -> MeanJusticeResult:
    """The justice nearest the mean of all nine positions."""
    if len(embedding.roster) != COURT_SIZE:
        raise DataError(f"Mean justice needs a {COURT_SIZE}-justice embedding.")
    points = embedding.as_array()
    center = points.mean(axis=0)
    distances = np.linalg.norm(points - center, axis=1)
    justice, distance, tie = _pick(list(embedding.roster), distances, False, DISTANCE_TIE * _scale(embedding))
    if tie:
        warn(f"Mean justice: tie for nearest to the court center; chose {justice}")
    return MeanJusticeResult(
        justice=justice,
        distance=distance,
        court_center=tuple(float(v) for v in center),
        tie=tie,
    )


def agreement_rate(results: list[FifthVoteResult]) -> Fraction:
    if not results:
        raise DataError("No fifth-vote results to compare.")
    return Fraction(sum(1 for r in results if r.agree), len(results))


def case_fifth_votes(court: CourtSlice, embedding: Embedding) -> list[FifthVoteResult]:
    """Fifth-vote determination for every 5-to-4 case of the slice, in case order."""
    votes = court.vote_matrix()
    results = []
    for case, row in zip(court.cases, votes):
        if list(row).count(MAJORITY) == COALITION_SIZE and list(row).count(DISSENT) == COURT_SIZE - COALITION_SIZE:
            members = [court.roster[i] for i in range(COURT_SIZE) if row[i] == MAJORITY]
            results.append(fifth_vote(embedding, members, case_id=case.case_id))
    return results


def influence_check(result: FifthVoteResult, embedding: Embedding) -> list[str]:
    """
    Problems with the circles of influence: every member must lie in the closed
    majority disk and none strictly inside the minority disk. Empty means consistent.
    """
    tolerance = DISTANCE_TIE * _scale(embedding)
    problems = []
    for name in result.members:
        point = embedding.point(name)
        to_majority = float(np.linalg.norm(point - np.asarray(result.focal.majority_focal)))
        to_minority = float(np.linalg.norm(point - np.asarray(result.focal.minority_focal)))
        if to_majority > result.majority_radius + tolerance:
            problems.append(f"{name} lies outside the majority circle")
        if to_minority < result.minority_radius - tolerance:
            problems.append(f"{name} lies inside the minority circle")
    return problems


def fifth_votes_to_json(results: list[FifthVoteResult]) -> str:
    return to_json([r.model_dump(mode='json') for r in results])
