"""Weighted undirected networks, their incidence/Laplacian matrices, and edge changes.

A network is a list of oriented edges ``(tail, head, weight)`` over nodes
``1..n`` (1-based, as in the common power-system case formats).  Internally
all matrices are dense numpy arrays; the largest bundled system has 145
nodes, for which dense is the right call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Network",
    "EdgeChangeSet",
    "incidence_matrix",
    "laplacian",
    "apply_changes",
    "edge_flows",
    "check_laplacian",
    "laplacian_edge_pairs",
    "write_edge_list",
    "read_edge_list",
]


def _norm_pair(i: int, j: int) -> tuple[int, int]:
    """Unordered node pair as a sorted tuple."""
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Network:
    """Weighted undirected network with oriented edges.

    Parameters
    ----------
    n : int
        Number of nodes, labelled 1..n.
    edges : sequence of (tail, head, weight)
        Oriented edges.  Weights must be strictly positive, self-loops are
        rejected, and at most one edge may join any unordered node pair.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(a), int(b), float(w)) for a, b, w in self.edges))
        if self.n < 1:
            raise ValueError(f"need at least one node, got n={self.n}")
        seen: set[tuple[int, int]] = set()
        for tail, head, w in self.edges:
            if not (1 <= tail <= self.n and 1 <= head <= self.n):
                raise ValueError(f"edge ({tail},{head}) out of range for n={self.n}")
            if tail == head:
                raise ValueError(f"self-loop ({tail},{head}) not allowed")
            if w <= 0:
                raise ValueError(f"edge ({tail},{head}) has non-positive weight {w}")
            pair = _norm_pair(tail, head)
            if pair in seen:
                raise ValueError(f"duplicate edge between nodes {pair}")
            seen.add(pair)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_pairs(self) -> set[tuple[int, int]]:
        """Unordered node pairs carrying an edge."""
        return {_norm_pair(t, h) for t, h, _ in self.edges}

    def weight(self, i: int, j: int) -> float:
        pair = _norm_pair(i, j)
        for t, h, w in self.edges:
            if _norm_pair(t, h) == pair:
                return w
        raise KeyError(f"no edge between nodes {pair}")


@dataclass(frozen=True)
class EdgeChangeSet:
    """Edges removed from and/or added to a reference network.

    ``removed`` holds unordered node pairs; ``added`` holds pairs with the
    weight of the new edge.  Validity against a concrete network (removals
    must exist, additions must not) is checked by :func:`apply_changes`.
    """

    removed: tuple[tuple[int, int], ...] = ()
    added: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "removed", tuple(sorted(_norm_pair(i, j) for i, j in self.removed))
        )
        object.__setattr__(
            self,
            "added",
            tuple(sorted((*_norm_pair(i, j), float(w)) for i, j, w in self.added)),
        )
        if len(set(self.removed)) != len(self.removed):
            raise ValueError("duplicate pair in removed set")
        added_pairs = [(i, j) for i, j, _ in self.added]
        if len(set(added_pairs)) != len(added_pairs):
            raise ValueError("duplicate pair in added set")
        overlap = set(self.removed) & set(added_pairs)
        if overlap:
            raise ValueError(f"pairs both removed and added: {sorted(overlap)}")

    @property
    def is_empty(self) -> bool:
        return not self.removed and not self.added


def incidence_matrix(net: Network) -> np.ndarray:
    """Signed edge-node incidence matrix, shape (m, n).

    Row i has -1 in the tail column and +1 in the head column of edge i,
    so every row sums to zero.
    """
    A = np.zeros((net.m, net.n))
    for k, (tail, head, _) in enumerate(net.edges):
        A[k, tail - 1] = -1.0
        A[k, head - 1] = 1.0
    return A


def laplacian(net: Network) -> np.ndarray:
    """Weighted Laplacian of the network, shape (n, n).

    Assembled entrywise: ``L[i, j] = -w`` for each edge {i, j} and the
    diagonal carries the weighted degree.  Equals ``A.T @ C @ A`` for the
    incidence matrix A and weight diagonal C (checked in the test suite as
    an independent construction path).
    """
    L = np.zeros((net.n, net.n))
    for tail, head, w in net.edges:
        i, j = tail - 1, head - 1
        L[i, j] -= w
        L[j, i] -= w
        L[i, i] += w
        L[j, j] += w
    return L


def check_laplacian(L: np.ndarray, tol: float = 1e-12) -> None:
    """Assert the invariants of a network Laplacian.

    Symmetric, zero row sums, non-positive off-diagonals, non-negative
    diagonal.  Difference matrices (L1 - L0) intentionally violate the sign
    conditions and must not be passed here.
    """
    L = np.asarray(L)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError(f"not square: shape {L.shape}")
    if not np.allclose(L, L.T, atol=tol, rtol=0):
        raise ValueError("not symmetric")
    if np.max(np.abs(L.sum(axis=1))) > tol * max(1.0, np.abs(L).max()):
        raise ValueError("row sums not zero")
    off = L - np.diag(np.diag(L))
    if off.max() > tol:
        raise ValueError("positive off-diagonal entry")
    if np.diag(L).min() < -tol:
        raise ValueError("negative diagonal entry")


def apply_changes(net: Network, changes: EdgeChangeSet) -> tuple[Network, np.ndarray, np.ndarray]:
    """Apply an edge-change set to a reference network.

    Returns ``(changed_net, L1, dL)`` where ``dL = L1 - L0``.  Removing an
    edge {i, j} of weight c puts +c at the (i, j)/(j, i) positions of dL and
    -c on both touched diagonal entries; additions do the opposite.

    Raises
    ------
    ValueError
        If a removed pair has no edge in ``net`` or an added pair already
        has one; the message names the offending pair.
    """
    existing = net.edge_pairs()
    for pair in changes.removed:
        if pair not in existing:
            raise ValueError(f"cannot remove ({pair[0]},{pair[1]}): no such edge")
    for i, j, _ in changes.added:
        if (i, j) in existing:
            raise ValueError(f"cannot add ({i},{j}): edge already present")

    removed = set(changes.removed)
    new_edges = [e for e in net.edges if _norm_pair(e[0], e[1]) not in removed]
    new_edges.extend((i, j, w) for i, j, w in changes.added)
    net1 = Network(net.n, tuple(new_edges))

    L0 = laplacian(net)
    L1 = laplacian(net1)
    return net1, L1, L1 - L0


def edge_flows(net: Network, u: np.ndarray) -> np.ndarray:
    """Edge flows w = C A u induced by node potentials u.

    Sign convention: flow on edge (tail, head) is weight * (u_head - u_tail),
    which makes the node balance ``A.T @ w == laplacian(net) @ u`` hold
    exactly.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (net.n,):
        raise ValueError(f"potential vector has shape {u.shape}, expected ({net.n},)")
    w = np.empty(net.m)
    for k, (tail, head, c) in enumerate(net.edges):
        w[k] = c * (u[head - 1] - u[tail - 1])
    return w


def laplacian_edge_pairs(L: np.ndarray, tol: float = 0.0) -> set[tuple[int, int]]:
    """Unordered 1-based node pairs where the matrix has a nonzero off-diagonal."""
    L = np.asarray(L)
    n = L.shape[0]
    pairs = set()
    for j in range(n):
        for i in range(j + 1, n):
            if abs(L[i, j]) > tol:
                pairs.add((j + 1, i + 1))
    return pairs


def write_edge_list(net: Network, path) -> None:
    """Serialize to the edge-list text format: one ``tail head weight`` per line.

    A ``# nodes:`` comment records n so isolated trailing nodes survive the
    round trip.
    """
    with open(path, "w") as fh:
        fh.write(f"# nodes: {net.n}\n")
        for tail, head, w in net.edges:
            fh.write(f"{tail} {head} {w!r}\n")


def read_edge_list(path_or_lines) -> Network:
    """Parse the edge-list text format written by :func:`write_edge_list`.

    Accepts a path or an iterable of lines.  ``#`` starts a comment; a
    ``# nodes: N`` comment pins the node count, otherwise the largest node
    id seen is used.
    """
    if isinstance(path_or_lines, (str, bytes)) or hasattr(path_or_lines, "__fspath__"):
        with open(path_or_lines) as fh:
            lines = fh.readlines()
    else:
        lines = list(path_or_lines)

    n_declared = None
    edges: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if line.startswith("#"):
            body = line[1:].strip()
            if body.lower().startswith("nodes:"):
                n_declared = int(body.split(":", 1)[1])
            continue
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'tail head weight', got {line!r}")
        try:
            tail, head, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        edges.append((tail, head, w))

    n = n_declared if n_declared is not None else max((max(t, h) for t, h, _ in edges), default=1)
    return Network(n, tuple(edges))
