"""Scaled ADMM solver for the constrained damped-least-squares step.

The problem solved here is

    min_dt   0.5*||J dt - dx||^2 + 0.5*lam*||dt||^2
    s.t.     A dt <= b

with J (m x n, m <= n) the task map, lam > 0 the damping constant, and r
linear inequality rows (r may be zero).  The inequality is split into an
equality with a nonnegative slack z, and the resulting two-block problem is
iterated with exact minimizations and a scaled dual update:

    dt <- (J'J + lam*I + rho*A'A)^-1 (J'dx - rho*A'(z - b + u))
    z  <- max(0, -A dt + b - u)
    u  <- u + A dt - b + z

Termination uses primal/dual residual norms against mixed absolute/relative
tolerances.  Strict convexity (lam > 0) makes the minimizer unique and the
iteration converges for every penalty rho > 0; `optimal_rho` returns the
spectrally optimal penalty 1/sqrt(sig_min*sig_max) of A Q^-1 A'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import cho_factor, cho_solve


class AdmmStatus(Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class DlmProblem:
    """One constrained damped-least-squares instance.

    Attributes
    ----------
    jacobian : (m, n) array, m <= n
        Task map from joint increments to task-space increments.
    delta_x : (m,) array
        Desired task-space increment.
    lam : float
        Damping constant, strictly positive.
    constraints_a : (r, n) array
        Inequality rows; r may be zero.
    constraints_b : (r,) array
        Inequality right-hand side.
    """

    jacobian: np.ndarray
    delta_x: np.ndarray
    lam: float
    constraints_a: np.ndarray
    constraints_b: np.ndarray

    def __post_init__(self):
        J = np.atleast_2d(np.asarray(self.jacobian, dtype=float))
        dx = np.asarray(self.delta_x, dtype=float).ravel()
        A = np.asarray(self.constraints_a, dtype=float)
        b = np.asarray(self.constraints_b, dtype=float).ravel()
        if A.size == 0:
            A = np.zeros((0, J.shape[1]))
        A = np.atleast_2d(A)
        m, n = J.shape
        if m > n:
            raise ValueError(f"jacobian must have m <= n, got {m}x{n}")
        if dx.shape != (m,):
            raise ValueError(f"delta_x has length {dx.size}, expected {m}")
        if self.lam <= 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if A.shape[1] != n:
            raise ValueError(f"constraints_a has {A.shape[1]} columns, expected {n}")
        if b.shape != (A.shape[0],):
            raise ValueError(
                f"constraints_b has length {b.size}, expected {A.shape[0]}"
            )
        object.__setattr__(self, "jacobian", J)
        object.__setattr__(self, "delta_x", dx)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "constraints_a", A)
        object.__setattr__(self, "constraints_b", b)

    @property
    def m(self) -> int:
        return self.jacobian.shape[0]

    @property
    def n(self) -> int:
        return self.jacobian.shape[1]

    @property
    def r(self) -> int:
        return self.constraints_a.shape[0]

    def objective(self, delta_theta: np.ndarray) -> float:
        """0.5*||J dt - dx||^2 + 0.5*lam*||dt||^2 at the given point."""
        dt = np.asarray(delta_theta, dtype=float).ravel()
        res = self.jacobian @ dt - self.delta_x
        return 0.5 * float(res @ res) + 0.5 * self.lam * float(dt @ dt)


@dataclass(frozen=True)
class AdmmSettings:
    """Penalty and termination parameters.

    rho=None selects the spectrally optimal penalty per solve (falling back
    to 1.0 for unconstrained problems, where the penalty is irrelevant).
    """

    rho: float | None = None
    eps_abs: float = 1e-5
    eps_rel: float = 1e-3
    max_iterations: int = 10000

    def __post_init__(self):
        if self.rho is not None and self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.eps_abs <= 0 or self.eps_rel <= 0:
            raise ValueError("eps_abs and eps_rel must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class AdmmState:
    """Primal iterate, slack, and scaled dual (u = y/rho)."""

    delta_theta: np.ndarray
    z: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta_theta", np.asarray(self.delta_theta, dtype=float).ravel())
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float).ravel())
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float).ravel())
        if self.z.shape != self.u.shape:
            raise ValueError("z and u must have the same length")

    @classmethod
    def zeros(cls, n: int, r: int) -> "AdmmState":
        return cls(np.zeros(n), np.zeros(r), np.zeros(r))


@dataclass(frozen=True)
class AdmmReport:
    """Solve outcome with the full per-iteration residual/objective history.

    `history` has one row per iteration: (primal_norm, dual_norm, objective).
    `eps_pri`/`eps_dual` are the tolerances at the final iterate, and
    `final_state` carries (z, u) for warm-starting a subsequent solve.
    """

    solution: np.ndarray
    iterations: int
    history: np.ndarray
    status: AdmmStatus
    rho_used: float
    final_state: AdmmState
    eps_pri: float
    eps_dual: float


@dataclass(frozen=True)
class ConvergenceDiagnostics:
    """Contraction factor and iteration-matrix spectrum for one instance.

    gamma = max_i (0.5*|1 - 2*sig_i| + 0.5) over the eigenvalues sig_i of the
    iteration matrix; gamma < 1 certifies linear convergence.
    """

    gamma: float
    p_eigenvalues: np.ndarray
    rho_star: float


def closed_form_dlm(jacobian, delta_x, lam: float) -> np.ndarray:
    """Unconstrained minimizer (J'J + lam*I)^-1 J' dx."""
    J = np.atleast_2d(np.asarray(jacobian, dtype=float))
    dx = np.asarray(delta_x, dtype=float).ravel()
    if lam <= 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    Q = J.T @ J + lam * np.eye(J.shape[1])
    return cho_solve(cho_factor(Q, lower=True), J.T @ dx)


def _check_dims(state: AdmmState, problem: DlmProblem):
    if state.delta_theta.size != problem.n:
        raise ValueError(
            f"state.delta_theta has length {state.delta_theta.size}, expected {problem.n}"
        )
    if state.z.size != problem.r:
        raise ValueError(f"state.z has length {state.z.size}, expected {problem.r}")


def _step_matrix_factor(problem: DlmProblem, rho: float):
    """Cholesky factor of J'J + lam*I + rho*A'A (SPD for lam > 0)."""
    H = problem.jacobian.T @ problem.jacobian + problem.lam * np.eye(problem.n)
    if problem.r:
        H = H + rho * (problem.constraints_a.T @ problem.constraints_a)
    return cho_factor(H, lower=True)


def admm_step(state: AdmmState, problem: DlmProblem, rho: float, factor=None) -> AdmmState:
    """One ADMM sweep: exact primal minimization, slack projection, dual ascent.

    `factor` may carry a cached Cholesky factor of the step matrix; it is
    only valid while (J, lam, A, rho) are unchanged.
    """
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    _check_dims(state, problem)
    if factor is None:
        factor = _step_matrix_factor(problem, rho)
    A = problem.constraints_a
    b = problem.constraints_b
    rhs = problem.jacobian.T @ problem.delta_x
    if problem.r:
        rhs = rhs - rho * (A.T @ (state.z - b + state.u))
    delta_theta = cho_solve(factor, rhs)
    if problem.r:
        a_dt = A @ delta_theta
        z = np.maximum(0.0, -a_dt + b - state.u)
        u = state.u + a_dt - b + z
    else:
        z = state.z
        u = state.u
    return AdmmState(delta_theta, z, u)


def compute_residuals(prev_z, state: AdmmState, problem: DlmProblem, rho: float):
    """Primal ||A dt + z - b|| and dual ||rho*A'(z - prev_z)|| norms."""
    A = problem.constraints_a
    b = problem.constraints_b
    prev_z = np.asarray(prev_z, dtype=float).ravel()
    primal = float(np.linalg.norm(A @ state.delta_theta + state.z - b))
    dual = float(np.linalg.norm(rho * (A.T @ (state.z - prev_z))))
    return primal, dual


def compute_tolerances(state: AdmmState, problem: DlmProblem, rho: float, settings: AdmmSettings):
    """Mixed absolute/relative termination tolerances at the current iterate."""
    A = problem.constraints_a
    b = problem.constraints_b
    scale_pri = max(
        np.linalg.norm(A @ state.delta_theta),
        np.linalg.norm(state.z),
        np.linalg.norm(b),
    )
    eps_pri = math.sqrt(problem.r) * settings.eps_abs + settings.eps_rel * scale_pri
    eps_dual = math.sqrt(problem.n) * settings.eps_abs + settings.eps_rel * float(
        np.linalg.norm(rho * (A.T @ state.u))
    )
    return eps_pri, eps_dual


def solve(problem: DlmProblem, settings: AdmmSettings | None = None,
          warm_start: AdmmState | None = None) -> AdmmReport:
    """Iterate ADMM until both residuals meet their tolerances.

    Starts from `warm_start` (or the all-zeros state), resolves rho=None via
    `optimal_rho`, and records the full residual/objective history.  Running
    out of iterations is reported through `status`, not raised.
    """
    if settings is None:
        settings = AdmmSettings()
    rho = settings.rho
    if rho is None:
        rho = optimal_rho(problem.jacobian, problem.lam, problem.constraints_a) if problem.r else 1.0
    state = warm_start if warm_start is not None else AdmmState.zeros(problem.n, problem.r)
    _check_dims(state, problem)
    factor = _step_matrix_factor(problem, rho)

    history = np.zeros((settings.max_iterations, 3))
    status = AdmmStatus.MAX_ITERATIONS
    eps_pri = eps_dual = 0.0
    k = 0
    for k in range(1, settings.max_iterations + 1):
        prev_z = state.z
        state = admm_step(state, problem, rho, factor=factor)
        primal, dual = compute_residuals(prev_z, state, problem, rho)
        history[k - 1] = (primal, dual, problem.objective(state.delta_theta))
        eps_pri, eps_dual = compute_tolerances(state, problem, rho, settings)
        if primal <= eps_pri and dual <= eps_dual:
            status = AdmmStatus.CONVERGED
            break
    return AdmmReport(
        solution=state.delta_theta.copy(),
        iterations=k,
        history=history[:k].copy(),
        status=status,
        rho_used=rho,
        final_state=state,
        eps_pri=eps_pri,
        eps_dual=eps_dual,
    )


# Relative cutoff under which an eigenvalue of A Q^-1 A' counts as zero
# (rank-deficient constraint rows).
_EIG_ZERO_REL = 1e-10


def _constraint_gram_eigs(jacobian, lam: float, constraints_a) -> np.ndarray:
    """Ascending eigenvalues of A (J'J + lam*I)^-1 A'."""
    J = np.atleast_2d(np.asarray(jacobian, dtype=float))
    A = np.atleast_2d(np.asarray(constraints_a, dtype=float))
    Q = J.T @ J + lam * np.eye(J.shape[1])
    S = A @ cho_solve(cho_factor(Q, lower=True), A.T)
    return np.linalg.eigvalsh(0.5 * (S + S.T))


def optimal_rho(jacobian, lam: float, constraints_a) -> float:
    """Spectrally optimal penalty 1/sqrt(sig_min*sig_max) of A Q^-1 A'.

    When A is not full row rank, sig_min is taken as the smallest eigenvalue
    above a relative cutoff, so duplicated or dependent rows do not drive the
    penalty to infinity.
    """
    if lam <= 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    A = np.atleast_2d(np.asarray(constraints_a, dtype=float))
    if A.size == 0 or A.shape[0] == 0:
        raise ValueError("optimal_rho requires at least one constraint row")
    sig = _constraint_gram_eigs(jacobian, lam, A)
    sig_max = float(sig[-1])
    if sig_max <= 0.0:
        raise ValueError("degenerate constraint matrix: A Q^-1 A' has no positive eigenvalue")
    nonzero = sig[sig > _EIG_ZERO_REL * sig_max]
    sig_min = float(nonzero[0])
    return 1.0 / math.sqrt(sig_min * sig_max)


def convergence_diagnostics(jacobian, lam: float, constraints_a, rho: float) -> ConvergenceDiagnostics:
    """Spectrum of the ADMM iteration matrix and the contraction factor gamma.

    The eigenvalues are obtained through the map sig -> sig/(1+sig) applied to
    the spectrum of rho*A Q^-1 A' and cross-checked against the direct
    eigendecomposition of rho*A (Q + rho*A'A)^-1 A'; disagreement signals a
    numerically broken instance and raises ArithmeticError.
    """
    if rho <= 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    J = np.atleast_2d(np.asarray(jacobian, dtype=float))
    A = np.atleast_2d(np.asarray(constraints_a, dtype=float))
    sig_m = np.maximum(rho * _constraint_gram_eigs(J, lam, A), 0.0)
    mapped = sig_m / (1.0 + sig_m)

    H = J.T @ J + lam * np.eye(J.shape[1]) + rho * (A.T @ A)
    P = rho * (A @ cho_solve(cho_factor(H, lower=True), A.T))
    direct = np.linalg.eigvalsh(0.5 * (P + P.T))
    if not np.allclose(mapped, direct, rtol=1e-6, atol=1e-6):
        raise ArithmeticError(
            "iteration-matrix spectrum mismatch between the eigenvalue map and "
            "direct eigendecomposition; instance is numerically degenerate"
        )

    gamma = float(np.max(0.5 * np.abs(1.0 - 2.0 * mapped) + 0.5))
    return ConvergenceDiagnostics(
        gamma=gamma,
        p_eigenvalues=mapped,
        rho_star=optimal_rho(J, lam, A),
    )
