"""Exact reference solver for small constrained damped-least-squares instances.

Candidate active sets are enumerated in order of increasing size; for each,
the equality-constrained problem is solved through its KKT system and checked
for primal and dual feasibility.  Because the objective is strictly convex
(lam > 0), any candidate passing both checks is the unique global minimizer,
so enumeration stops at the first fully feasible candidate.  Sets with
linearly dependent rows are skipped: whenever the optimum has dependent
active rows, some independent subset of them carries a valid multiplier
certificate, so nothing is lost.

Intended purely for verification; exponential in the number of rows and
guarded accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import nnls

from .solver import DlmProblem

MAX_ENUMERATED_ROWS = 20
_FEAS_TOL = 1e-9


class OracleCapacityError(ValueError):
    """Instance has too many rows for exhaustive active-set enumeration."""


class InfeasibleProblemError(RuntimeError):
    """No active-set candidate satisfies the constraints."""


@dataclass(frozen=True)
class OracleSolution:
    delta_theta: np.ndarray
    active_set: frozenset
    objective: float


def _active_candidate(H, g, A, b, subset):
    """Solve the equality-constrained problem for one active set.

    Returns (delta_theta, multipliers) or None when the rows of the subset
    are linearly dependent (covered by an independent subset elsewhere).
    """
    n = H.shape[0]
    if not subset:
        return np.linalg.solve(H, g), np.zeros(0)
    rows = list(subset)
    A_s = A[rows]
    if np.linalg.matrix_rank(A_s) < len(rows):
        return None
    k = len(rows)
    kkt = np.block([[H, A_s.T], [A_s, np.zeros((k, k))]])
    rhs = np.concatenate([g, b[rows]])
    sol = np.linalg.solve(kkt, rhs)
    return sol[:n], sol[n:]


def oracle_solve(problem: DlmProblem) -> OracleSolution:
    """Global minimizer of a small instance by active-set enumeration.

    Raises OracleCapacityError for more than MAX_ENUMERATED_ROWS rows and
    InfeasibleProblemError when no candidate is feasible.
    """
    if problem.r > MAX_ENUMERATED_ROWS:
        raise OracleCapacityError(
            f"{problem.r} rows exceed the enumeration guard of {MAX_ENUMERATED_ROWS}"
        )
    J = problem.jacobian
    A = problem.constraints_a
    b = problem.constraints_b
    H = J.T @ J + problem.lam * np.eye(problem.n)
    g = J.T @ problem.delta_x

    # At most n independent rows can be active, so larger sets never qualify.
    for size in range(0, min(problem.r, problem.n) + 1):
        for subset in combinations(range(problem.r), size):
            candidate = _active_candidate(H, g, A, b, subset)
            if candidate is None:
                continue
            delta_theta, mu = candidate
            if problem.r and np.max(A @ delta_theta - b) > _FEAS_TOL:
                continue
            if mu.size and np.min(mu) < -_FEAS_TOL:
                continue
            return OracleSolution(
                delta_theta=delta_theta,
                active_set=frozenset(subset),
                objective=problem.objective(delta_theta),
            )
    raise InfeasibleProblemError("no active-set candidate is feasible")


def verify_kkt(problem: DlmProblem, delta_theta, tol: float):
    """Check the optimality conditions at a candidate point.

    Multipliers for the near-active rows (slack <= tol) are reconstructed by
    nonnegative least squares, so dual feasibility holds by construction and
    any remaining defect lands in the stationarity residual.  Stationarity is
    scaled by (1 + ||J' dx||) so the check is meaningful across problem
    magnitudes.

    Returns (ok, residuals) with per-condition entries 'stationarity',
    'primal', 'dual', and 'complementarity'.
    """
    dt = np.asarray(delta_theta, dtype=float).ravel()
    if dt.size != problem.n:
        raise ValueError(f"delta_theta has length {dt.size}, expected {problem.n}")
    A = problem.constraints_a
    b = problem.constraints_b
    H = problem.jacobian.T @ problem.jacobian + problem.lam * np.eye(problem.n)
    g = problem.jacobian.T @ problem.delta_x
    grad = H @ dt - g

    slack = b - A @ dt if problem.r else np.zeros(0)
    primal = float(max(0.0, np.max(-slack))) if problem.r else 0.0

    active = np.flatnonzero(slack <= tol) if problem.r else np.zeros(0, dtype=int)
    if active.size:
        mu, stat = nnls(A[active].T, -grad)
        comp = float(np.max(mu * np.clip(slack[active], 0.0, None)))
    else:
        mu = np.zeros(0)
        stat = float(np.linalg.norm(grad))
        comp = 0.0

    scale = 1.0 + float(np.linalg.norm(g))
    residuals = {
        "stationarity": float(stat),
        "primal": primal,
        "dual": float(max(0.0, -np.min(mu))) if mu.size else 0.0,
        "complementarity": comp,
    }
    ok = (
        residuals["stationarity"] <= tol * scale
        and residuals["primal"] <= tol
        and residuals["dual"] <= tol
        and residuals["complementarity"] <= tol * scale
    )
    return ok, residuals
