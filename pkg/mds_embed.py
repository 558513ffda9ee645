"""
Classical (Torgerson) multidimensional scaling of a court's dissimilarity matrix.

The d-dimensional coordinates are the first d columns of one eigendecomposition,
so the 1-D embedding is exactly the first column of the 2-D embedding.
"""
import functools
import math
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from agreement import DissimilarityMatrix
from utils import ConfigurationError, DataError, EigenConvergenceError, rows_to_csv, to_json, warn

JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100
# eigenvalues this close to zero (relative to the largest) carry no dimension
ZERO_EIGENVALUE = 1e-12
TIE_TOLERANCE = 1e-12


class Embedding(BaseModel):
    roster: list[str]
    dimension: int
    coords: list[list[float]]
    eigenvalues: list[float]
    spectrum: list[float]
    truncated: bool = False
    orientation_note: list[str] = []

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.float64)

    def point(self, name: str) -> np.ndarray:
        return np.asarray(self.coords[self.roster.index(name)], dtype=np.float64)

    def x1(self) -> dict[str, float]:
        return {name: coords[0] for name, coords in zip(self.roster, self.coords)}


def _off_diagonal_max(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.abs(off).max()) if a.shape[0] > 1 else 0.0


def _residual(original: np.ndarray, values: np.ndarray, vectors: np.ndarray) -> float:
    return float(np.abs(original - vectors @ np.diag(values) @ vectors.T).max())


def symmetric_eigen(
    matrix: np.ndarray,
    tolerance: float = JACOBI_TOLERANCE,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Returns the eigenvalues in descending order and the matching orthonormal
    eigenvectors as columns. Each eigenvector is signed so that its first
    component with magnitude above 1e-12 is positive; equal eigenvalues are ordered
    by comparing their eigenvectors lexicographically, larger first.
    """
    original = np.array(matrix, dtype=np.float64)
    if original.ndim != 2 or original.shape[0] != original.shape[1]:
        raise DataError(f"Expected a square matrix, got shape {original.shape}.")
    n = original.shape[0]
    scale = max(1.0, float(np.abs(original).max()) if n else 1.0)
    if n and float(np.abs(original - original.T).max()) > 1e-12 * scale:
        raise DataError("Matrix is not symmetric.")

    a = (original + original.T) / 2.0
    v = np.eye(n)
    threshold = tolerance * scale

    for _ in range(max_sweeps):
        if _off_diagonal_max(a) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
    else:
        if _off_diagonal_max(a) > threshold:
            values = np.diag(a).copy()
            raise EigenConvergenceError(
                f"Jacobi iteration did not converge in {max_sweeps} sweeps "
                f"(off-diagonal {_off_diagonal_max(a):.3e}, residual {_residual(original, values, v):.3e})."
            )

    values = np.diag(a).copy()

    for k in range(n):
        column = v[:, k]
        significant = np.nonzero(np.abs(column) > 1e-12)[0]
        if significant.size and column[significant[0]] < 0:
            v[:, k] = -column

    def _compare(i: int, j: int) -> int:
        if abs(values[i] - values[j]) > TIE_TOLERANCE * scale:
            return -1 if values[i] > values[j] else 1
        first, second = tuple(v[:, i]), tuple(v[:, j])
        if first == second:
            return 0
        return -1 if first > second else 1

    order = sorted(range(n), key=functools.cmp_to_key(_compare))
    return values[order], v[:, order]


def _anchor_candidates(anchor: Optional[Union[str, Sequence[str]]]) -> list[str]:
    if anchor is None:
        return []
    if isinstance(anchor, str):
        return [anchor]
    return list(anchor)


def _largest_magnitude(column: np.ndarray, roster: list[str]) -> int:
    peak = float(np.abs(column).max())
    tied = [i for i in range(len(roster)) if peak - abs(column[i]) <= TIE_TOLERANCE * max(peak, 1.0)]
    return min(tied, key=lambda i: roster[i])


def _orient(coords: np.ndarray, roster: list[str], anchor: Optional[Union[str, Sequence[str]]]) -> list[str]:
    notes = []

    anchored = None
    for name in _anchor_candidates(anchor):
        if name in roster:
            anchored = roster.index(name)
            break
    if _anchor_candidates(anchor) and anchored is None:
        warn(f"None of the anchor justices ({', '.join(_anchor_candidates(anchor))}) is on the roster; "
             "orienting dimension 1 by largest magnitude")

    if anchored is not None and coords[anchored, 0] != 0.0:
        reference = anchored
        rule = f"anchor {roster[anchored]}"
    else:
        reference = _largest_magnitude(coords[:, 0], roster)
        rule = f"largest |x1| ({roster[reference]})"
    if coords[reference, 0] < 0:
        coords[:, 0] = -coords[:, 0]
        notes.append(f"dimension 1 reflected so {rule} is positive")
    else:
        notes.append(f"dimension 1 kept; {rule} is positive")

    if np.any(coords[:, 1] != 0.0):
        reference = _largest_magnitude(coords[:, 1], roster)
        if coords[reference, 1] < 0:
            coords[:, 1] = -coords[:, 1]
            notes.append(f"dimension 2 reflected so largest |x2| ({roster[reference]}) is positive")
        else:
            notes.append(f"dimension 2 kept; largest |x2| ({roster[reference]}) is positive")
    return notes


def classical_mds(
    matrix: DissimilarityMatrix,
    dimension: int = 2,
    anchor: Optional[Union[str, Sequence[str]]] = None,
) -> Embedding:
    """
    Torgerson scaling: coordinates are the top eigenvectors of
    B = -1/2 J (D o D) J scaled by the square roots of their eigenvalues.

    `anchor` names the justice (or a preference list of justices) placed on the
    positive side of dimension 1.
    """
    if dimension not in (1, 2):
        raise ConfigurationError(f"MDS dimension must be 1 or 2, got {dimension}.")

    d = matrix.values
    n = matrix.size
    centering = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * centering @ (d * d) @ centering
    b = (b + b.T) / 2.0

    values, vectors = symmetric_eigen(b)
    largest = max(abs(float(values[0])), 1e-300) if n else 1.0

    coords = np.zeros((n, 2))
    leading = []
    truncated = False
    for k in range(2):
        value = float(values[k]) if k < n else 0.0
        if value <= ZERO_EIGENVALUE * largest:
            truncated = True
            leading.append(0.0)
            if k < dimension:
                warn(f"MDS: eigenvalue {k + 1} is {value:.3e}, not positive; dimension {k + 1} embedded as zero")
            continue
        leading.append(value)
        coords[:, k] = vectors[:, k] * math.sqrt(value)

    negative = [float(v) for v in values if v < -ZERO_EIGENVALUE * largest]
    if negative:
        truncated = True
        warn(f"MDS: dissimilarities are not Euclidean; {len(negative)} negative eigenvalue(s) truncated "
             f"(most negative {min(negative):.3e})")

    notes = _orient(coords, list(matrix.roster), anchor)
    if dimension == 1:
        notes = notes[:1]

    return Embedding(
        roster=list(matrix.roster),
        dimension=dimension,
        coords=coords[:, :dimension].tolist(),
        eigenvalues=leading[:dimension],
        spectrum=[float(v) for v in values],
        truncated=truncated,
        orientation_note=notes,
    )


def leading_dimensions(embedding: Embedding, dimension: int) -> Embedding:
    """The first `dimension` coordinates of an existing embedding (same decomposition)."""
    if not 1 <= dimension <= embedding.dimension:
        raise ConfigurationError(f"Cannot take {dimension} dimension(s) of a {embedding.dimension}-D embedding.")
    return embedding.model_copy(update={
        "dimension": dimension,
        "coords": [coords[:dimension] for coords in embedding.coords],
        "eigenvalues": embedding.eigenvalues[:dimension],
        "orientation_note": embedding.orientation_note[:dimension],
    })


def stress(matrix: DissimilarityMatrix, embedding: Embedding) -> float:
    """Sum over pairs of (embedded distance - dissimilarity)^2."""
    if list(matrix.roster) != list(embedding.roster):
        raise DataError("Matrix and embedding rosters differ.")
    points = embedding.as_array()
    diff = points[:, None, :] - points[None, :, :]
    distances = np.sqrt((diff * diff).sum(axis=2))
    upper = np.triu_indices(matrix.size, 1)
    return float(((distances[upper] - matrix.values[upper]) ** 2).sum())


def ordering(embedding: Embedding) -> list[str]:
    """Roster names from left to right along dimension 1 (ties by name)."""
    return [name for _, name in sorted((coords[0], name) for name, coords in zip(embedding.roster, embedding.coords))]


def embedding_to_csv(embedding: Embedding) -> str:
    axes = [f"x{k + 1}" for k in range(embedding.dimension)]
    eigen_headers = [f"eigenvalue{k + 1}" for k in range(embedding.dimension)]
    rows = [
        [name] + [repr(float(c)) for c in coords] + [repr(float(e)) for e in embedding.eigenvalues]
        for name, coords in zip(embedding.roster, embedding.coords)
    ]
    return rows_to_csv(["justice_name"] + axes + eigen_headers, rows)


def embedding_to_json(embedding: Embedding) -> str:
    return to_json(embedding.model_dump(mode='json'))
