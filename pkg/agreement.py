"""Voting dissimilarity between the justices of a court slice."""
import itertools
from fractions import Fraction
from typing import Optional

import numpy as np
from pydantic import BaseModel, model_validator

from scdb_ingest import MAJORITY, CourtSlice
from utils import DataError, rows_to_csv, to_json


class DissimilarityMatrix(BaseModel):
    """
    d[i][j] = disagreements[i][j] / case_count, kept as integer numerators so the
    entries are exact rationals until they are exported as floats.
    """
    roster: list[str]
    disagreements: list[list[int]]
    case_count: int

    @model_validator(mode='after')
    def _check(self):
        n = len(self.roster)
        if self.case_count <= 0:
            raise ValueError("case_count must be positive")
        if len(self.disagreements) != n or any(len(row) != n for row in self.disagreements):
            raise ValueError(f"disagreements must be a {n}x{n} matrix")
        for i in range(n):
            if self.disagreements[i][i] != 0:
                raise ValueError(f"nonzero diagonal entry for {self.roster[i]}")
            for j in range(i + 1, n):
                count = self.disagreements[i][j]
                if count != self.disagreements[j][i]:
                    raise ValueError(f"asymmetric entry between {self.roster[i]} and {self.roster[j]}")
                if not 0 <= count <= self.case_count:
                    raise ValueError(f"entry {count} outside [0, {self.case_count}]")
        return self

    @property
    def size(self) -> int:
        return len(self.roster)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.disagreements, dtype=np.float64) / self.case_count

    def fraction(self, i: int, j: int) -> Fraction:
        return Fraction(self.disagreements[i][j], self.case_count)

    def entry(self, first: str, second: str) -> Fraction:
        return self.fraction(self.roster.index(first), self.roster.index(second))


def dissimilarity_matrix(court: CourtSlice) -> DissimilarityMatrix:
    """
    One minus the share of the slice's cases in which two justices cast the same
    majority code. Every pair uses the full slice size as the denominator.
    """
    votes = court.vote_matrix()
    if votes.shape[0] == 0:
        raise DataError(f"Court '{court.label}' has no cases to compare votes on.")
    # (cases, i, j) -> True where justices i and j disagree
    disagree = votes[:, :, None] != votes[:, None, :]
    counts = disagree.sum(axis=0)
    return DissimilarityMatrix(
        roster=list(court.roster),
        disagreements=counts.astype(int).tolist(),
        case_count=int(votes.shape[0]),
    )


def agreement_anchor(court: CourtSlice) -> Optional[str]:
    """
    Default orientation anchor: take the pair of justices with the second-highest
    number of cases where both sided with the majority, then the justice outside
    that pair who joined both of them in the majority most often. Ties go to the
    alphabetically first names. None for a slice without cases.
    """
    votes = court.vote_matrix()
    if votes.shape[0] == 0:
        return None
    majority = (votes == MAJORITY).astype(np.int64)
    together = majority.T @ majority
    names = list(court.roster)
    pairs = sorted(
        ((int(together[i, j]), names[i], names[j], i, j) for i, j in itertools.combinations(range(len(names)), 2)),
        key=lambda item: (-item[0], tuple(sorted(item[1:3]))),
    )
    if len(pairs) < 2:
        return None
    _, _, _, first, second = pairs[1]
    joint = majority[:, first] * majority[:, second]
    scores = [(-int((joint * majority[:, k]).sum()), names[k]) for k in range(len(names)) if k not in (first, second)]
    return min(scores)[1]


def from_values(roster: list[str], values: np.ndarray, denominator: int = 10**15) -> DissimilarityMatrix:
    """
    Builds a matrix from real entries in [0, 1] by rounding them onto a common
    denominator. Used for synthetic and externally supplied dissimilarities.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.min() < 0.0 or values.max() > 1.0:
        raise DataError("Dissimilarities must lie in [0, 1].")
    counts = np.rint(values * denominator).astype(np.int64)
    counts = np.triu(counts, 1)
    counts = counts + counts.T
    return DissimilarityMatrix(roster=list(roster), disagreements=counts.tolist(), case_count=denominator)


def matrix_to_csv(matrix: DissimilarityMatrix) -> str:
    values = matrix.values
    rows = [[name] + [repr(float(v)) for v in values[i]] for i, name in enumerate(matrix.roster)]
    return rows_to_csv(["justice"] + list(matrix.roster), rows)


def matrix_to_json(matrix: DissimilarityMatrix) -> str:
    return to_json({
        "roster": matrix.roster,
        "case_count": matrix.case_count,
        "disagreements": matrix.disagreements,
        "values": matrix.values.tolist(),
    })
