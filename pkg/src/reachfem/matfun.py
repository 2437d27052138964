"""Dense matrix functions used by the conservative time discretization."""

from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import NumericError
from .sets import ConvexSet, Hyperrectangle, LinearMap, symmetric_interval_hull


def _dense(matrix) -> np.ndarray:
    if scipy.sparse.issparse(matrix):
        matrix = matrix.toarray()
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    return mat


def expm(matrix, delta: float) -> np.ndarray:
    """State-transition matrix exp(matrix * delta), scaling-and-squaring."""
    mat = _dense(matrix)
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    phi = scipy.linalg.expm(mat * delta)
    if not np.all(np.isfinite(phi)):
        raise NumericError("matrix exponential produced non-finite entries")
    return phi


def p_series(
    matrix,
    delta: float,
    rtol: float = 1e-16,
    min_terms: int = 10,
    max_terms: int = 500,
) -> np.ndarray:
    """Second-order Taylor remainder factor of exp(A*delta).

    Evaluates sum_{i>=0} A^i delta^(i+2) / (i+2)!  term by term, stopping once
    the next term falls below ``rtol`` of the running sum in max norm.  At
    least ``min_terms`` powers beyond A^0 are always included so short series
    are never truncated early.
    """
    mat = _dense(matrix)
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    n = mat.shape[0]
    term = np.eye(n) * (delta * delta / 2.0)
    total = term.copy()
    for i in range(1, max_terms + 1):
        term = (term @ mat) * (delta / (i + 2))
        total += term
        if not np.all(np.isfinite(total)):
            raise NumericError(f"remainder series overflowed after {i} terms")
        if i >= min_terms and np.max(np.abs(term)) <= rtol * np.max(np.abs(total)):
            return total
    raise NumericError(
        f"remainder series did not converge within {max_terms} terms "
        f"(norm(A)*delta is likely too large for this time step)"
    )


def e_plus(matrix, set_: ConvexSet, delta: float) -> Hyperrectangle:
    """Origin-centered box bounding the one-step curvature of the flow.

    Fattens the segment between a set and its one-step image enough that the
    convex hull encloses every intermediate state of x' = A x.  Computed as
    the symmetric interval hull of A^2 X, scaled by the remainder series of
    the entrywise absolute value of A.
    """
    mat = _dense(matrix)
    if mat.shape[0] != set_.dim:
        raise ValueError(
            f"matrix of size {mat.shape[0]} incompatible with set of dimension {set_.dim}"
        )
    inner = symmetric_interval_hull(LinearMap(mat @ mat, set_))
    remainder = p_series(np.abs(mat), delta)
    return Hyperrectangle(np.zeros(set_.dim), remainder @ inner.radius)
