"""Support-recovery scoring and lambda sweeps averaged over seeded runs.

A coordinate of the estimate is called nonzero when it exceeds a relative
threshold (numerical solvers do not return exact zeros off the optimum).
Counts are reported as proportions of the coordinate vector length, so
tp + tn + fp + fn = 1 and acc = tp + tn.  The rate variants (tp_rate =
recovered fraction of the truly changed coordinates, tn_rate likewise for
the unchanged ones) are what sweep figures plot, since they approach 1 in
the good regime regardless of sparsity level.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from .graph import EdgeChangeSet, Network, apply_changes, laplacian
from .simulate import simulate
from .solvers import LassoConfig, TlsConfig, lasso, tls_proximal_gradient
from .vectorize import build_design, support_reduce, vech

__all__ = [
    "ConfusionCounts",
    "classify_support",
    "accuracy",
    "Scenario",
    "SweepRow",
    "lambda_sweep",
    "write_sweep_csv",
    "write_sweep_json",
]


def default_zero_threshold(beta_hat: np.ndarray) -> float:
    """Relative cutoff below which an estimated coordinate counts as zero."""
    return 1e-6 * max(1.0, float(np.max(np.abs(beta_hat))) if beta_hat.size else 1.0)


@dataclass(frozen=True)
class ConfusionCounts:
    """Support-classification proportions over the coordinates of beta."""

    tp: float
    tn: float
    fp: float
    fn: float

    @property
    def tp_rate(self) -> float:
        """Fraction of truly changed coordinates flagged nonzero (recall)."""
        denom = self.tp + self.fn
        return self.tp / denom if denom > 0 else 1.0

    @property
    def tn_rate(self) -> float:
        """Fraction of truly unchanged coordinates left at zero."""
        denom = self.tn + self.fp
        return self.tn / denom if denom > 0 else 1.0


def classify_support(beta_hat: np.ndarray, beta_true: np.ndarray, eps: float | None = None) -> ConfusionCounts:
    """Compare estimated against true support, coordinate by coordinate.

    A coordinate is a true positive when both vectors are nonzero there
    (|estimate| above ``eps``), a false positive when only the estimate is,
    and so on.  Proportions are normalized by the vector length.
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    beta_true = np.asarray(beta_true, dtype=float)
    if beta_hat.shape != beta_true.shape:
        raise ValueError(f"length mismatch: {beta_hat.shape} vs {beta_true.shape}")
    if eps is None:
        eps = default_zero_threshold(beta_hat)
    hat_nz = np.abs(beta_hat) > eps
    true_nz = beta_true != 0.0
    p = beta_hat.size
    return ConfusionCounts(
        tp=float(np.sum(hat_nz & true_nz)) / p,
        tn=float(np.sum(~hat_nz & ~true_nz)) / p,
        fp=float(np.sum(hat_nz & ~true_nz)) / p,
        fn=float(np.sum(~hat_nz & true_nz)) / p,
    )


def accuracy(c: ConfusionCounts) -> float:
    """(tp + tn) / (tp + tn + fp + fn); equals tp + tn under the normalization."""
    total = c.tp + c.tn + c.fp + c.fn
    return (c.tp + c.tn) / total if total > 0 else 0.0


@dataclass(frozen=True)
class Scenario:
    """A reference network, an edge change, and the measurement protocol."""

    net: Network
    changes: EdgeChangeSet
    T: int
    noise_variance: float

    def truth(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(L0, L1, beta_true) with beta_true = vech(L1 - L0)."""
        L0 = laplacian(self.net)
        _, L1, dL = apply_changes(self.net, self.changes)
        return L0, L1, vech(dL)


@dataclass(frozen=True)
class SweepRow:
    """Mean scores over the runs of one lambda grid point."""

    lam: float
    tp: float
    tn: float
    fp: float
    fn: float
    acc: float
    tp_rate: float
    tn_rate: float
    runs: int
    seeds: tuple[int, ...]
    solver: str
    nonconverged: int = 0


def _sweep_one_run(
    scenario: Scenario,
    lambdas: tuple[float, ...],
    seed: int,
    solver: str,
    reduced: bool,
    lambda_scale: float,
    standardize: bool,
    tol: float | None,
    max_iters: int | None,
) -> list[tuple[ConfusionCounts, bool]]:
    """Scores for every lambda on the data of a single seeded run."""
    L0, L1, beta_true_full = scenario.truth()
    ms = simulate(L1, scenario.T, scenario.noise_variance, seed)
    ds = build_design(ms, L0)
    if reduced:
        ds = support_reduce(ds, L0)
        beta_true = beta_true_full[ds.support]
    else:
        beta_true = beta_true_full

    out = []
    for lam in lambdas:
        lam_solver = lam * lambda_scale
        if solver == "lasso":
            kwargs = {"lam": lam_solver, "standardize": standardize}
            if tol is not None:
                kwargs["tol"] = tol
            if max_iters is not None:
                kwargs["max_iters"] = max_iters
            est = lasso(ds, LassoConfig(**kwargs))
        elif solver == "tls":
            kwargs = {"lam": lam_solver}
            if tol is not None:
                kwargs["tol"] = tol
            if max_iters is not None:
                kwargs["max_iters"] = max_iters
            est = tls_proximal_gradient(ds, TlsConfig(**kwargs))
        else:
            raise ValueError(f"unknown solver {solver!r}")
        out.append((classify_support(est.beta, beta_true), est.converged))
    return out


def lambda_sweep(
    scenario: Scenario,
    lambdas,
    runs: int,
    seed0: int = 0,
    solver: str = "lasso",
    reduced: bool = False,
    lambda_scale: float = 1.0,
    standardize: bool = False,
    tol: float | None = None,
    max_iters: int | None = None,
    jobs: int = 1,
) -> list[SweepRow]:
    """Score the solver over a lambda grid, averaging over seeded runs.

    Run r uses measurement seed ``seed0 + r``; the same data serve every
    lambda, so rows are deterministic functions of (scenario, grid, runs,
    seed0).  ``lambda_scale`` multiplies the reported grid value before it
    reaches the solver, letting reports use a differently scaled axis
    convention than the solver objective.  Solver non-convergence is
    counted per cell, never fatal.  ``jobs > 1`` distributes runs over
    processes; the reduction order is fixed by run index either way.
    """
    lambdas = tuple(float(x) for x in lambdas)
    if not lambdas:
        raise ValueError("lambda grid is empty")
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    seeds = tuple(seed0 + r for r in range(runs))
    args = [
        (scenario, lambdas, s, solver, reduced, lambda_scale, standardize, tol, max_iters)
        for s in seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_run = list(pool.map(_sweep_one_run_star, args))
    else:
        per_run = [_sweep_one_run(*a) for a in args]

    rows = []
    for li, lam in enumerate(lambdas):
        cells = [per_run[r][li] for r in range(runs)]
        counts = [c for c, _ in cells]
        mean = lambda vals: float(np.mean(vals))  # noqa: E731
        tp = mean([c.tp for c in counts])
        tn = mean([c.tn for c in counts])
        fp = mean([c.fp for c in counts])
        fn = mean([c.fn for c in counts])
        rows.append(
            SweepRow(
                lam=lam,
                tp=tp,
                tn=tn,
                fp=fp,
                fn=fn,
                acc=mean([accuracy(c) for c in counts]),
                tp_rate=mean([c.tp_rate for c in counts]),
                tn_rate=mean([c.tn_rate for c in counts]),
                runs=runs,
                seeds=seeds,
                solver=solver,
                nonconverged=sum(1 for _, ok in cells if not ok),
            )
        )
    return sorted(rows, key=lambda r: r.lam)


def _sweep_one_run_star(a):
    return _sweep_one_run(*a)


def write_sweep_csv(rows: list[SweepRow], path) -> None:
    """CSV with columns ``lambda,tp,tn,fp,fn,acc,runs,solver``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "tp", "tn", "fp", "fn", "acc", "runs", "solver"])
        for r in rows:
            writer.writerow(
                [repr(r.lam), repr(r.tp), repr(r.tn), repr(r.fp), repr(r.fn), repr(r.acc), r.runs, r.solver]
            )


def write_sweep_json(rows: list[SweepRow], path, config: dict | None = None) -> None:
    """Full sweep dump: every row field plus an echo of the run configuration."""
    payload = {
        "config": config or {},
        "rows": [asdict(r) for r in rows],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
