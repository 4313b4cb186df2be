"""Sparse estimators for the change vector.

Two routes:

* :func:`lasso` -- l1-regularized least squares solved by cyclic coordinate
  descent with active-set passes.  The objective is
  ``0.5 * ||y - X beta0 - X beta||^2 + lam * ||beta||_1`` (no 1/N factor);
  sweep configurations that want a differently scaled axis pass the scale
  factor explicitly so reports stay comparable.
* :func:`tls_proximal_gradient` -- the errors-in-variables estimator in its
  unconstrained form ``||X(beta0+beta) - y||^2 / (1 + ||beta0+beta||^2)
  + lam * ||beta||_1``, attacked with ISTA plus backtracking.  The problem
  is non-convex; only descent is guaranteed, not global optimality.

Coordinate descent never materializes X: a column indexed by node pair
(i, j) touches only measurement rows i and j, so each update costs O(T).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .vectorize import DesignSystem

__all__ = [
    "LassoConfig",
    "TlsConfig",
    "Estimate",
    "soft_threshold",
    "lasso",
    "lambda_max",
    "tls_objective",
    "tls_smooth_gradient",
    "tls_proximal_gradient",
    "least_norm_errors",
]


def soft_threshold(z, t):
    """Soft-thresholding ``sign(z) * max(|z| - t, 0)``; works on scalars and arrays."""
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


@dataclass(frozen=True)
class LassoConfig:
    """Settings for the coordinate-descent LASSO solver.

    ``standardize`` rescales each column of X to unit norm for the fit
    (equivalent to penalizing coordinate k by ``lam * ||x_k||``); the
    returned coefficients are always on the original scale.
    """

    lam: float = 0.1
    tol: float = 1e-8
    max_iters: int = 100_000
    standardize: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")


@dataclass(frozen=True)
class TlsConfig:
    """Settings for the proximal-gradient solver of the reformulated objective."""

    lam: float = 0.1
    step_size: float = 1.0
    backtrack: float = 0.5  # step shrink factor, in (0, 1)
    fixed_step: bool = False
    tol: float = 1e-6  # step-norm stopping rule
    max_iters: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.backtrack < 1.0):
            raise ValueError(f"backtrack factor must be in (0,1), got {self.backtrack}")
        if self.lam < 0 or self.step_size <= 0 or self.tol <= 0:
            raise ValueError("lam >= 0, step_size > 0 and tol > 0 required")


@dataclass
class Estimate:
    """Solver output: coefficients plus convergence bookkeeping."""

    beta: np.ndarray  # estimable coordinates (reduced length if support-reduced)
    objective_trace: list[float]
    iterations: int
    converged: bool
    solver: str
    lam: float
    tol: float
    max_iters: int
    support: np.ndarray | None = None  # full-vech indices when reduced
    n: int = 0
    extra: dict = field(default_factory=dict)

    def beta_full(self, p_full: int | None = None) -> np.ndarray:
        """Coefficients padded out to the full vech length."""
        if self.support is None:
            return self.beta.copy()
        if p_full is None:
            p_full = self.n * (self.n + 1) // 2
        out = np.zeros(p_full)
        out[self.support] = self.beta
        return out

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")

    def to_dict(self) -> dict:
        """JSON-ready summary with the nonzeros as (full vech index, value) pairs."""
        idx = np.flatnonzero(self.beta)
        full_idx = idx if self.support is None else np.asarray(self.support)[idx]
        return {
            "solver": self.solver,
            "lambda": self.lam,
            "iterations": self.iterations,
            "converged": self.converged,
            "objective": self.objective,
            "tol": self.tol,
            "max_iters": self.max_iters,
            "n": self.n,
            "reduced": self.support is not None,
            "beta": [[int(a), float(b)] for a, b in zip(full_idx, self.beta[idx])],
            **self.extra,
        }


def _correlations(ds: DesignSystem, R: np.ndarray) -> np.ndarray:
    """X.T applied to a residual given as its (n, T) matrix form."""
    return ds.rmatvec(R.reshape(-1, order="F"))


def lambda_max(ds: DesignSystem) -> float:
    """Smallest lam for which the LASSO solution is identically zero.

    Equals ``||X.T (y - X beta0)||_inf`` in the unstandardized convention.
    """
    R0 = ds.residual_matrix(np.zeros(ds.p))
    return float(np.max(np.abs(_correlations(ds, R0)))) if ds.p else 0.0


def lasso(ds: DesignSystem, cfg: LassoConfig) -> Estimate:
    """Cyclic coordinate descent for the l1-penalized residual fit.

    The response is ``y - X beta0`` (the known part of the model is removed
    up front).  Each outer round does one full cyclic pass and then
    re-cycles over the active set until it stabilizes; convergence is
    declared when every coordinate satisfies its subgradient condition to
    within ``cfg.tol`` scaled by the column norm.  Exactly-zero columns are
    frozen at zero.  Non-convergence returns ``converged=False`` rather
    than raising.
    """
    rows_i, rows_j = ds.pair_rows
    U = ds.U
    p = ds.p
    col_sq = ds.column_squared_norms()
    col_norm = np.sqrt(col_sq)
    live = col_sq > 0.0
    # standardization == per-coordinate penalty proportional to column norm
    lam_w = cfg.lam * col_norm if cfg.standardize else np.full(p, cfg.lam)

    beta = np.zeros(p)
    R = ds.residual_matrix(beta)  # F - L0 U at beta = 0
    trace: list[float] = []
    iters = 0
    converged = False

    def one_pass(indices) -> float:
        max_step = 0.0
        for k in indices:
            i, j = rows_i[k], rows_j[k]
            if i != j:
                g = U[j] @ R[i] + U[i] @ R[j]
            else:
                g = U[i] @ R[i]
            z = g + beta[k] * col_sq[k]
            new = soft_threshold(z, lam_w[k]) / col_sq[k]
            d = new - beta[k]
            if d != 0.0:
                beta[k] = new
                R[i] -= d * U[j]
                if i != j:
                    R[j] -= d * U[i]
                step = abs(d) * col_norm[k]
                if step > max_step:
                    max_step = step
        return max_step

    def objective() -> float:
        return 0.5 * float(np.sum(R * R)) + float(np.sum(lam_w * np.abs(beta)))

    all_live = np.flatnonzero(live)
    while iters < cfg.max_iters:
        # optimality check at the current point
        c = _correlations(ds, R)
        viol = np.zeros(p)
        active = beta != 0.0
        viol[active] = np.abs(c[active] - lam_w[active] * np.sign(beta[active]))
        viol[~active] = np.maximum(np.abs(c[~active]) - lam_w[~active], 0.0)
        viol[~live] = 0.0
        scaled = viol[live] / col_norm[live]
        if scaled.size == 0 or np.max(scaled) <= cfg.tol:
            converged = True
            break

        one_pass(all_live)
        iters += 1
        trace.append(objective())
        # cheap re-cycles over the current nonzeros
        while iters < cfg.max_iters:
            act = np.flatnonzero(beta)
            if act.size == 0:
                break
            step = one_pass(act)
            iters += 1
            trace.append(objective())
            if step <= 0.1 * cfg.tol:
                break

    if not trace:
        trace.append(objective())
    return Estimate(
        beta=beta,
        objective_trace=trace,
        iterations=iters,
        converged=converged,
        solver="lasso-cd",
        lam=cfg.lam,
        tol=cfg.tol,
        max_iters=cfg.max_iters,
        support=None if ds.support is None else np.asarray(ds.support),
        n=ds.n,
        extra={"standardize": cfg.standardize},
    )


# -- errors-in-variables route ---------------------------------------------


def _smooth_parts(beta: np.ndarray, ds: DesignSystem):
    """Residual matrix, denominator and squared norm for the EIV objective."""
    R = ds.residual_matrix(beta)  # equals -(X(beta0+beta) - y) in matrix form
    b = ds.beta0_eff + beta
    d = 1.0 + float(b @ b)
    rsq = float(np.sum(R * R))
    return R, b, d, rsq


def tls_objective(beta: np.ndarray, ds: DesignSystem, lam: float) -> float:
    """Value of ``||X(beta0+beta) - y||^2 / (1 + ||beta0+beta||^2) + lam ||beta||_1``."""
    beta = np.asarray(beta, dtype=float)
    _, _, d, rsq = _smooth_parts(beta, ds)
    return rsq / d + lam * float(np.sum(np.abs(beta)))


def tls_smooth_gradient(beta: np.ndarray, ds: DesignSystem) -> np.ndarray:
    """Gradient of the smooth (non-l1) part of the EIV objective.

    With b = beta0 + beta, r = Xb - y and d = 1 + ||b||^2 this is
    ``2 X.T r / d - (2 ||r||^2 / d^2) b``.
    """
    beta = np.asarray(beta, dtype=float)
    R, b, d, rsq = _smooth_parts(beta, ds)
    xtr = -_correlations(ds, R)  # X.T r with r = Xb - y = -vec(R)
    return 2.0 * xtr / d - (2.0 * rsq / d**2) * b


def tls_proximal_gradient(ds: DesignSystem, cfg: TlsConfig, init: np.ndarray | None = None) -> Estimate:
    """ISTA with backtracking on the reformulated EIV objective.

    Each iterate is ``soft_threshold(beta - s * grad, s * lam)``; the step s
    shrinks by ``cfg.backtrack`` until the local quadratic upper bound
    holds, which makes the objective trace non-increasing.  Stops when the
    step norm drops below ``cfg.tol``.  ``init`` defaults to zero; passing
    a LASSO solution as a warm start is the usual alternative.
    """
    beta = np.zeros(ds.p) if init is None else np.asarray(init, dtype=float).copy()
    if beta.shape != (ds.p,):
        raise ValueError(f"init has shape {beta.shape}, expected ({ds.p},)")

    s = cfg.step_size
    _, _, d, rsq = _smooth_parts(beta, ds)
    f_val = rsq / d
    trace = [f_val + cfg.lam * float(np.sum(np.abs(beta)))]
    converged = False
    iters = 0

    for _ in range(cfg.max_iters):
        g = tls_smooth_gradient(beta, ds)
        while True:
            cand = soft_threshold(beta - s * g, s * cfg.lam)
            diff = cand - beta
            _, _, d_c, rsq_c = _smooth_parts(cand, ds)
            f_cand = rsq_c / d_c
            if cfg.fixed_step:
                break
            bound = f_val + float(g @ diff) + float(diff @ diff) / (2.0 * s)
            if f_cand <= bound + 1e-12 * max(1.0, abs(f_val)):
                break
            s *= cfg.backtrack
            if s < 1e-18:  # stalled; accept and bail via the step-norm test
                break
        step_norm = float(np.linalg.norm(diff))
        beta, f_val = cand, f_cand
        iters += 1
        trace.append(f_val + cfg.lam * float(np.sum(np.abs(beta))))
        if step_norm <= cfg.tol:
            converged = True
            break

    return Estimate(
        beta=beta,
        objective_trace=trace,
        iterations=iters,
        converged=converged,
        solver="tls-ista",
        lam=cfg.lam,
        tol=cfg.tol,
        max_iters=cfg.max_iters,
        support=None if ds.support is None else np.asarray(ds.support),
        n=ds.n,
        extra={"step_size": cfg.step_size, "backtrack": cfg.backtrack},
    )


def least_norm_errors(beta: np.ndarray, ds: DesignSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form minimum-norm data errors compatible with the EIV constraint.

    For fixed beta the smallest-norm pair (dX, dy) with
    ``y + dy = (X + dX)(beta0 + beta)`` is, with r = y - X(beta0+beta) and
    d = 1 + ||beta0+beta||^2,

        dX = outer(r, beta0+beta) / d,     dy = -r / d.

    Returns ``(dX, dy, v)`` where v stacks the columns of [dX dy]; its
    squared norm equals the smooth part of the EIV objective.
    """
    beta = np.asarray(beta, dtype=float)
    R, b, d, _ = _smooth_parts(beta, ds)
    r = R.reshape(-1, order="F")  # y - X(beta0+beta)
    nT, p = ds.shape
    if nT * (p + 1) > 50_000_000:
        raise MemoryError("error matrices too large to materialize; reduce the system first")
    dX = np.outer(r, b) / d
    dy = -r / d
    v = np.concatenate([dX.reshape(-1, order="F"), dy])
    return dX, dy, v
