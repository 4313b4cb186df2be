"""Equilibrium-consistent measurement generation with additive Gaussian noise.

Node potentials are drawn i.i.d. standard normal and the injected flows are
derived through the changed Laplacian, so the true data satisfy the balance
equation to machine precision.  Measurements equal truth minus error:
``U_noisy = U_true - dU`` and ``F_noisy = F_true - dF``, with the error
entries i.i.d. zero-mean Gaussian of the requested variance.

All randomness comes from ``numpy.random.default_rng`` (PCG64); the seed is
stored on the result so every report can be reproduced bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .graph import EdgeChangeSet, Network

__all__ = ["MeasurementSet", "simulate", "random_removal_scenario"]


@dataclass(frozen=True)
class MeasurementSet:
    """True and noisy potential/flow matrices over a horizon of T samples."""

    T: int
    U_true: np.ndarray  # (n, T)
    F_true: np.ndarray
    U_noisy: np.ndarray
    F_noisy: np.ndarray
    noise_variance: float
    seed: int

    @property
    def n(self) -> int:
        return self.U_true.shape[0]

    def write_csv(self, path) -> None:
        """Long-format CSV with header ``t,node,u_true,u_noisy,f_true,f_noisy``."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "node", "u_true", "u_noisy", "f_true", "f_noisy"])
            for t in range(self.T):
                for i in range(self.n):
                    writer.writerow(
                        [
                            t + 1,
                            i + 1,
                            repr(self.U_true[i, t]),
                            repr(self.U_noisy[i, t]),
                            repr(self.F_true[i, t]),
                            repr(self.F_noisy[i, t]),
                        ]
                    )


def simulate(L1: np.ndarray, T: int, noise_variance: float, seed: int) -> MeasurementSet:
    """Draw T equilibrium samples from the changed network and corrupt them.

    Parameters
    ----------
    L1 : (n, n) array
        Laplacian of the network after the change.
    T : int
        Horizon length, at least 1.
    noise_variance : float
        Entrywise variance of the measurement errors on both potentials and
        flows; 0 yields noiseless data.
    seed : int
        Seed for the PCG64 generator; equal seeds give bit-identical output.
    """
    L1 = np.asarray(L1, dtype=float)
    if T < 1:
        raise ValueError(f"horizon T must be >= 1, got {T}")
    if noise_variance < 0:
        raise ValueError(f"noise variance must be >= 0, got {noise_variance}")
    n = L1.shape[0]
    rng = np.random.default_rng(seed)
    U_true = rng.standard_normal((n, T))
    F_true = L1 @ U_true
    sigma = float(np.sqrt(noise_variance))
    dU = rng.normal(0.0, sigma, size=(n, T)) if sigma > 0 else np.zeros((n, T))
    dF = rng.normal(0.0, sigma, size=(n, T)) if sigma > 0 else np.zeros((n, T))
    return MeasurementSet(
        T=T,
        U_true=U_true,
        F_true=F_true,
        U_noisy=U_true - dU,
        F_noisy=F_true - dF,
        noise_variance=float(noise_variance),
        seed=int(seed),
    )


def random_removal_scenario(net: Network, k: int, seed: int) -> EdgeChangeSet:
    """Pick k distinct existing edges uniformly without replacement for removal."""
    if k < 0 or k > net.m:
        raise ValueError(f"cannot remove {k} of {net.m} edges")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(net.m, size=k, replace=False)
    pairs = tuple((net.edges[c][0], net.edges[c][1]) for c in sorted(chosen))
    return EdgeChangeSet(removed=pairs)
