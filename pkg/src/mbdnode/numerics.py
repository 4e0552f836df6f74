"""Dense linear algebra and numerical-verification helpers.

The solver is a plain LU factorization with partial pivoting; every system in
this package is small (the largest is the 17x17 saddle-point system of the
constrained three-body plant) and well scaled, so nothing fancier is needed.
A ``Matrix`` is just a 2-D C-order float64 ndarray.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

Matrix = np.ndarray

# relative pivot threshold below which a matrix is declared singular;
# generous enough to flag genuinely locked/degenerate configurations while
# letting round-off-sized pivots of healthy systems through
SINGULAR_RTOL = 1e-12

# returned by convergence_order when the stepper reproduces the exact
# solution at some step size (no order can be estimated from zero errors)
EXACT = math.inf


class SingularMatrixError(ArithmeticError):
    """Pivot fell below SINGULAR_RTOL * max|A| during elimination."""


def lu_factor(A: Matrix):
    """LU with partial pivoting.  Returns (LU, perm) where LU packs both
    factors and perm is the row permutation applied to the input."""
    A = np.array(A, dtype=float)
    n, m = A.shape
    if n != m:
        raise ValueError(f"square matrix required, got {A.shape}")
    scale = np.max(np.abs(A))
    if not np.isfinite(scale):
        raise ValueError("matrix has non-finite entries")
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[p, k]) < SINGULAR_RTOL * max(scale, 1e-300):
            raise SingularMatrixError(f"pivot {abs(A[p, k]):.3e} at column {k}")
        if p != k:
            A[[k, p]] = A[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        A[k + 1:, k] /= A[k, k]
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:])
    return A, perm


def lu_backsub(LU: Matrix, perm: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = LU.shape[0]
    x = np.asarray(b, dtype=float)[perm].copy()
    for k in range(1, n):  # forward, unit lower triangle
        x[k] -= LU[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):  # backward
        x[k] = (x[k] - LU[k, k + 1:] @ x[k + 1:]) / LU[k, k]
    return x


def lu_solve(A: Matrix, b) -> np.ndarray:
    """Solve A x = b by partial-pivoted LU.

    Raises SingularMatrixError when a pivot is below SINGULAR_RTOL * max|A|.
    For well-conditioned A the residual satisfies
    ``||Ax - b||_inf <= 1e-8 * (1 + ||b||_inf)``.
    """
    LU, perm = lu_factor(A)
    return lu_backsub(LU, perm, np.asarray(b, dtype=float))


def convergence_order(integrate: Callable[[float], np.ndarray],
                      exact: np.ndarray,
                      step_sizes: Sequence[float]) -> float:
    """Estimate an integrator's order of accuracy.

    ``integrate(h)`` must run the scheme at step size h over a fixed interval
    and return the final state; ``exact`` is the true final state.  The order
    is the least-squares slope of log(error) vs log(h) over ``step_sizes``
    (at least 3, in geometric progression).  Returns ``EXACT`` (math.inf)
    when any error vanishes, since no finite order is estimable then.
    """
    hs = np.asarray(list(step_sizes), dtype=float)
    if hs.size < 3:
        raise ValueError("need at least 3 step sizes")
    errors = np.array([np.max(np.abs(integrate(h) - exact)) for h in hs])
    if np.any(errors == 0.0):
        return EXACT
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)
