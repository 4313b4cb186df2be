"""Half-vectorization algebra and the regression system built from measurements.

The matrix balance equation ``F = (L0 + dL) U`` turns, after column-stacking
and removal of the symmetric repeats, into the linear model

    y = X (beta0 + beta),        X = (U.T kron I_n) D,

with ``beta0 = vech(L0)`` known and ``beta = vech(dL)`` the sparse unknown.
``D`` is the duplication matrix mapping vech to vec.  X is never formed
densely on the hot paths: its columns are indexed by node pairs and touch at
most two rows of the measurement matrix, which is what the solvers exploit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

__all__ = [
    "VechIndexMap",
    "vech",
    "unvech",
    "duplication_matrix",
    "elimination_matrix",
    "DesignSystem",
    "build_design",
    "support_reduce",
]

# Materializing X densely is capped at ~10^7 entries (80 MB); bigger systems
# go through the implicit column/matvec paths.
DENSE_ENTRY_LIMIT = 10_000_000


class VechIndexMap:
    """Bijection between vech positions and lower-triangular node pairs.

    Ordering is column-major over the lower triangle including the diagonal
    (the standard convention for duplication/elimination matrices):
    position k of vech(M) holds M[rows[k], cols[k]] with rows[k] >= cols[k].
    Node pairs here are 0-based.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        self.n = n
        self.p = n * (n + 1) // 2
        self.rows = np.concatenate([np.arange(j, n) for j in range(n)])
        self.cols = np.concatenate([np.full(n - j, j) for j in range(n)])

    def index(self, i: int, j: int) -> int:
        """Vech position of entry (i, j), 0-based, order-insensitive."""
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"pair ({i},{j}) out of range for n={self.n}")
        if i < j:
            i, j = j, i
        return j * self.n - j * (j - 1) // 2 + (i - j)

    def pair(self, k: int) -> tuple[int, int]:
        """Lower-triangular (row, col) pair at vech position k."""
        return int(self.rows[k]), int(self.cols[k])

    def diagonal_indices(self) -> np.ndarray:
        return np.array([self.index(i, i) for i in range(self.n)])


def vech(M: np.ndarray) -> np.ndarray:
    """Half-vectorization: lower triangle of M, column-major, diagonal included."""
    M = np.asarray(M)
    n = M.shape[0]
    im = VechIndexMap(n)
    return M[im.rows, im.cols].astype(float, copy=True)


def unvech(v: np.ndarray, n: int) -> np.ndarray:
    """Symmetric n-by-n matrix whose half-vectorization is v.

    Raises ValueError when len(v) != n(n+1)/2.
    """
    v = np.asarray(v, dtype=float)
    im = VechIndexMap(n)
    if v.shape != (im.p,):
        raise ValueError(f"vector of length {v.shape} cannot fill an {n}x{n} symmetric matrix")
    M = np.zeros((n, n))
    M[im.rows, im.cols] = v
    M[im.cols, im.rows] = v
    return M


def duplication_matrix(n: int) -> sp.csr_matrix:
    """Duplication matrix D with D @ vech(M) = vec(M) for symmetric M.

    Shape (n^2, n(n+1)/2); each row holds a single 1.  Returned sparse, it
    is a pure selection structure.
    """
    im = VechIndexMap(n)
    vec_rows = np.arange(n * n)
    i, j = vec_rows % n, vec_rows // n  # column-major vec: position i + n*j
    lo = np.minimum(i, j)
    hi = np.maximum(i, j)
    vech_cols = lo * n - lo * (lo - 1) // 2 + (hi - lo)
    return sp.csr_matrix(
        (np.ones(n * n), (vec_rows, vech_cols)), shape=(n * n, im.p)
    )


def elimination_matrix(n: int) -> sp.csr_matrix:
    """Elimination matrix E with E @ vec(M) = vech(M); satisfies E @ D = I.

    Shape (n(n+1)/2, n^2); selects the lower-triangular entry of each
    symmetric pair.
    """
    im = VechIndexMap(n)
    vec_cols = im.rows + n * im.cols  # lower-triangular (i, j) at vec position i + n*j
    return sp.csr_matrix(
        (np.ones(im.p), (np.arange(im.p), vec_cols)), shape=(im.p, n * n)
    )


@dataclass(frozen=True)
class DesignSystem:
    """The regression objects of the vectorized measurement model.

    Conceptually X = (U.T kron I_n) D with y = vec(F) and beta0 = vech(L0);
    ``U`` and ``F`` are the noisy measurement matrices.  When ``support`` is
    set, the system is restricted to those vech coordinates (columns of X),
    and ``beta0`` is zero off the support.

    All arrays are treated as immutable after construction.
    """

    U: np.ndarray  # (n, T) noisy potentials
    F: np.ndarray  # (n, T) noisy injected flows
    beta0: np.ndarray  # full-length vech(L0), shape (p,)
    index_map: VechIndexMap
    support: np.ndarray | None = None  # sorted vech indices, or None for the full model

    def __post_init__(self):
        n, T = self.U.shape
        if self.F.shape != (n, T):
            raise ValueError(f"U is {self.U.shape} but F is {self.F.shape}")
        if self.index_map.n != n:
            raise ValueError("index map does not match measurement dimension")
        if self.beta0.shape != (self.index_map.p,):
            raise ValueError(
                f"beta0 has length {self.beta0.shape}, expected {self.index_map.p}"
            )
        if self.support is not None:
            s = np.asarray(self.support)
            off = np.setdiff1d(np.arange(self.index_map.p), s)
            if np.any(self.beta0[off] != 0.0):
                raise ValueError("beta0 has mass outside the declared support")

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def T(self) -> int:
        return self.U.shape[1]

    @property
    def p_full(self) -> int:
        return self.index_map.p

    @property
    def p(self) -> int:
        """Number of estimable coordinates (columns of X in this system)."""
        return self.p_full if self.support is None else len(self.support)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n * self.T, self.p)

    @property
    def is_reduced(self) -> bool:
        return self.support is not None

    @cached_property
    def y(self) -> np.ndarray:
        """vec(F), column-stacked response."""
        return self.F.reshape(-1, order="F").copy()

    @cached_property
    def beta0_eff(self) -> np.ndarray:
        """beta0 restricted to the estimable coordinates."""
        return self.beta0 if self.support is None else self.beta0[self.support]

    @cached_property
    def pair_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """0-based (i, j) node pairs of the estimable coordinates, i >= j."""
        im = self.index_map
        if self.support is None:
            return im.rows, im.cols
        return im.rows[self.support], im.cols[self.support]

    def to_full(self, v: np.ndarray) -> np.ndarray:
        """Pad a coordinate vector of this system out to full vech length."""
        v = np.asarray(v, dtype=float)
        if self.support is None:
            if v.shape != (self.p_full,):
                raise ValueError("length mismatch")
            return v.copy()
        out = np.zeros(self.p_full)
        out[self.support] = v
        return out

    # -- implicit operator ------------------------------------------------

    def matvec(self, v: np.ndarray) -> np.ndarray:
        """X @ v, computed as vec(unvech(v) @ U) without forming X."""
        M = unvech(self.to_full(v), self.n)
        return (M @ self.U).reshape(-1, order="F")

    def rmatvec(self, r: np.ndarray) -> np.ndarray:
        """X.T @ r for a stacked residual r of length n*T."""
        r = np.asarray(r, dtype=float)
        R = r.reshape(self.n, self.T, order="F")
        W = R @ self.U.T
        G = W + W.T
        G[np.diag_indices(self.n)] = np.diag(W)  # diagonal coordinates hit one row only
        full = G[self.index_map.rows, self.index_map.cols]
        return full if self.support is None else full[self.support]

    def column_squared_norms(self) -> np.ndarray:
        """Squared Euclidean norms of the columns of X."""
        rows_i, rows_j = self.pair_rows
        sq = (self.U ** 2).sum(axis=1)
        out = sq[rows_i] + sq[rows_j]
        diag = rows_i == rows_j
        out[diag] = sq[rows_i[diag]]
        return out

    def residual_matrix(self, beta: np.ndarray, include_beta0: bool = True) -> np.ndarray:
        """F - M U as an (n, T) matrix, where M = unvech(beta0 + beta)."""
        b = self.to_full(beta)
        if include_beta0:
            b = b + self.beta0
        return self.F - unvech(b, self.n) @ self.U

    def dense_X(self, force: bool = False) -> np.ndarray:
        """Materialize X densely (columns restricted to the support if reduced).

        Guarded by DENSE_ENTRY_LIMIT unless ``force`` is set; large systems
        should stay on the implicit paths.
        """
        nT, p = self.shape
        if not force and nT * p > DENSE_ENTRY_LIMIT:
            raise MemoryError(
                f"dense X would hold {nT * p} entries; pass force=True to override"
            )
        X = np.zeros((nT, p))
        rows_i, rows_j = self.pair_rows
        n, T = self.n, self.T
        t_idx = np.arange(T)
        for k in range(p):
            i, j = rows_i[k], rows_j[k]
            X[i + n * t_idx, k] += self.U[j]
            if i != j:
                X[j + n * t_idx, k] += self.U[i]
        return X


def build_design(measurements, L0: np.ndarray) -> DesignSystem:
    """Assemble the full regression system from noisy measurements and L0.

    ``measurements`` is either a :class:`~lapdiff.simulate.MeasurementSet`
    or a plain ``(U, F)`` pair of (n, T) arrays.
    """
    if hasattr(measurements, "U_noisy"):
        U_noisy, F_noisy = measurements.U_noisy, measurements.F_noisy
    else:
        U_noisy, F_noisy = measurements
    U = np.asarray(U_noisy, dtype=float)
    F = np.asarray(F_noisy, dtype=float)
    L0 = np.asarray(L0, dtype=float)
    if U.ndim != 2:
        raise ValueError(f"U must be (n, T), got shape {U.shape}")
    n = U.shape[0]
    if L0.shape != (n, n):
        raise ValueError(f"L0 is {L0.shape}, expected ({n},{n})")
    return DesignSystem(U=U, F=F, beta0=vech(L0), index_map=VechIndexMap(n))


def support_reduce(ds: DesignSystem, L0: np.ndarray) -> DesignSystem:
    """Restrict the system to the vech support of L0: its edges plus every diagonal.

    Valid for removal-only change identification, where the change vector
    lives inside the reference support.  The reduced dimension is m + n for
    a reference network with m edges.
    """
    if ds.is_reduced:
        raise ValueError("design system is already support-reduced")
    L0 = np.asarray(L0, dtype=float)
    n = ds.n
    if L0.shape != (n, n):
        raise ValueError(f"L0 is {L0.shape}, expected ({n},{n})")
    im = ds.index_map
    off_diag = (im.rows != im.cols) & (L0[im.rows, im.cols] != 0.0)
    keep = off_diag | (im.rows == im.cols)  # all diagonals stay, even if numerically zero
    support = np.flatnonzero(keep)
    return DesignSystem(U=ds.U, F=ds.F, beta0=ds.beta0, index_map=im, support=support)
