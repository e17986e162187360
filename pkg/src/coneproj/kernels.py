"""Dense numerical kernels: nonnegative least squares, LP feasibility, linear solves.

All kernels are deterministic and operate on small dense problems (tens of
dimensions).  They back the cone projection and certification layers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

# Smallest/largest singular value ratio below which a matrix is treated as
# rank deficient.
RANK_RTOL = 1e-8

DEFAULT_BOX = 1e3
DEFAULT_MARGIN = 1e-7


class SingularMatrixError(ValueError):
    """Matrix is singular or rank deficient beyond the configured threshold."""


class IndeterminateError(RuntimeError):
    """An iterative kernel failed to reach a conclusive answer."""


@dataclass(frozen=True)
class NnlsResult:
    """Solution of min ||A @ coefficients - b|| subject to coefficients >= 0."""

    coefficients: np.ndarray
    residual: float
    active: frozenset  # indices clamped at zero


@dataclass(frozen=True)
class LpResult:
    status: str  # "feasible" | "infeasible" | "indeterminate"
    witness: np.ndarray | None
    margin: float


def solve_linear(A, b):
    """Solve A x = b for square nonsingular A (partial-pivoting LU).

    Raises SingularMatrixError when the singular value ratio of A falls
    below RANK_RTOL.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < RANK_RTOL * sv[0]:
        raise SingularMatrixError("matrix is numerically singular")
    return np.linalg.solve(A, b)


def nnls(A, b, tol=1e-10, max_iter=None):
    """Lawson-Hanson active-set nonnegative least squares.

    Minimizes ||A @ x - b|| subject to x >= 0 for A with full column rank
    (columns <= rows).  Ties in the gradient-based column selection break
    toward the lowest index, so the iteration is fully deterministic.

    Raises SingularMatrixError on rank-deficient A and IndeterminateError
    when the iteration cap (10 * n by default) is exhausted.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    m, n = A.shape
    if m < n:
        raise ValueError("A must have at least as many rows as columns")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < RANK_RTOL * sv[0]:
        raise SingularMatrixError("A is rank deficient")
    if max_iter is None:
        max_iter = 10 * n

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    iters = 0
    while True:
        w = A.T @ (b - A @ x)
        w_free = np.where(passive, -np.inf, w)
        j = int(np.argmax(w_free))  # argmax breaks ties toward lowest index
        if w_free[j] <= tol:
            break
        passive[j] = True
        while True:
            iters += 1
            if iters > max_iter:
                raise IndeterminateError("nnls iteration cap exceeded")
            idx = np.flatnonzero(passive)
            s_sub, *_ = np.linalg.lstsq(A[:, idx], b, rcond=None)
            if s_sub.min() > 0.0:
                x = np.zeros(n)
                x[idx] = s_sub
                break
            # Step toward s until the first passive coordinate hits zero.
            s = np.zeros(n)
            s[idx] = s_sub
            mask = passive & (s <= 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(mask, x / (x - s), np.inf)
            alpha = float(np.min(ratios))
            x = x + alpha * (s - x)
            passive &= x > tol * max(1.0, float(np.max(np.abs(x))))
            x[~passive] = 0.0

    residual = float(np.linalg.norm(b - A @ x))
    active = frozenset(int(i) for i in np.flatnonzero(~passive))
    return NnlsResult(coefficients=x, residual=residual, active=active)


def lp_feasible(constraints, box=DEFAULT_BOX, margin=DEFAULT_MARGIN):
    """Decide whether the linear inequalities admit a point with uniform slack.

    `constraints` is an iterable of (normal, offset, sense) triples encoding
    <normal, x> <= offset (sense "<=") or >= offset (sense ">=").  Normals are
    rescaled to unit length, so `margin` is a geometric distance.  The search
    is restricted to the box ||x||_inf <= box; feasibility is decided by
    maximizing the common slack and comparing it against `margin`.
    """
    rows = []
    rhs = []
    dim = None
    for normal, offset, sense in constraints:
        u = np.asarray(normal, dtype=float)
        if dim is None:
            dim = u.size
        elif u.size != dim:
            raise ValueError("constraint dimensions disagree")
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            raise ValueError("zero constraint normal")
        u = u / nu
        c = float(offset) / nu
        if sense == "<=":
            rows.append(np.append(u, 1.0))
            rhs.append(c)
        elif sense == ">=":
            rows.append(np.append(-u, 1.0))
            rhs.append(-c)
        else:
            raise ValueError(f"unknown sense {sense!r}")
    if dim is None:
        raise ValueError("no constraints given")

    cost = np.zeros(dim + 1)
    cost[-1] = -1.0  # maximize slack
    bounds = [(-box, box)] * dim + [(None, box)]
    res = linprog(cost, A_ub=np.array(rows), b_ub=np.array(rhs),
                  bounds=bounds, method="highs")
    if not res.success:
        return LpResult(status="indeterminate", witness=None, margin=float("nan"))
    slack = float(res.x[-1])
    if slack >= margin:
        return LpResult(status="feasible", witness=res.x[:-1].copy(), margin=slack)
    return LpResult(status="infeasible", witness=None, margin=slack)
