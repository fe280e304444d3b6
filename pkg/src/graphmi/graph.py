"""Graph container, adjacency vector codec and the normalization primitives.

The relaxed adjacency vector ``a`` holds the ``N(N-1)/2`` upper-triangular
entries of a symmetric adjacency matrix in row-major order, i.e. the order of
``np.triu_indices(N, k=1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class CodecError(ValueError):
    """Raised when a vector/matrix does not match the adjacency codec contract."""


class GraphError(ValueError):
    """Raised when a graph violates its structural invariants."""


def num_pairs(num_nodes: int) -> int:
    return num_nodes * (num_nodes - 1) // 2


def num_nodes_for(length: int) -> int:
    """Invert ``n = N(N-1)/2``; raises CodecError when ``length`` is not triangular."""
    N = int(round((1 + math.sqrt(1 + 8 * length)) / 2))
    if num_pairs(N) != length:
        raise CodecError(f"vector length {length} is not N(N-1)/2 for any integer N")
    return N


@lru_cache(maxsize=32)
def _pair_index(num_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(num_nodes, k=1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def pair_index(num_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of every pair ``i < j`` in vector order."""
    return _pair_index(num_nodes)


def vec_to_matrix(a: np.ndarray, num_nodes: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise CodecError(f"adjacency vector must be 1-D, got shape {a.shape}")
    if num_nodes is None:
        num_nodes = num_nodes_for(a.size)
    elif a.size != num_pairs(num_nodes):
        raise CodecError(
            f"adjacency vector has length {a.size}, expected {num_pairs(num_nodes)} for N={num_nodes}"
        )
    rows, cols = pair_index(num_nodes)
    A = np.zeros((num_nodes, num_nodes))
    A[rows, cols] = a
    A[cols, rows] = a
    return A


def matrix_to_vec(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise CodecError(f"adjacency matrix must be square, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise CodecError("adjacency matrix is not symmetric")
    if np.any(np.diag(A) != 0):
        raise CodecError("adjacency matrix has a nonzero diagonal")
    rows, cols = pair_index(A.shape[0])
    return A[rows, cols].copy()


def fold_symmetric(G: np.ndarray) -> np.ndarray:
    """Pull a gradient w.r.t. a dense matrix back to the vector parameterization.

    Each vector entry drives both ``A[i, j]`` and ``A[j, i]``, so its gradient is
    the sum of the two matrix entries.
    """
    rows, cols = pair_index(G.shape[0])
    return G[rows, cols] + G[cols, rows]


def normalize_adjacency(A: np.ndarray) -> np.ndarray:
    """Symmetric GCN normalization ``D^-1/2 (A + I) D^-1/2``; fractional A allowed."""
    A_hat = np.asarray(A, dtype=float) + np.eye(A.shape[0])
    s = 1.0 / np.sqrt(A_hat.sum(axis=1))
    return s[:, None] * A_hat * s[None, :]


def _inv_sqrt_degree(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = A.sum(axis=1)
    s = np.zeros_like(d)
    pos = d > 0
    s[pos] = 1.0 / np.sqrt(d[pos])
    return d, s


def smoothness_loss(a: np.ndarray, X: np.ndarray) -> float:
    """Feature smoothness on the degree-normalized Laplacian of the relaxed graph.

    ``1/2 sum_ij A_ij ||x_i/sqrt(d_i) - x_j/sqrt(d_j)||^2`` with ``d`` the row sums
    of A (no self loop). Isolated nodes contribute nothing.
    """
    X = np.asarray(X, dtype=float)
    A = vec_to_matrix(a)
    if X.shape[0] != A.shape[0]:
        raise GraphError(f"feature matrix has {X.shape[0]} rows, graph has {A.shape[0]} nodes")
    _, s = _inv_sqrt_degree(A)
    # Expanded in Gram form: sum_i [d_i>0] ||x_i||^2 - s^T (A o XX^T) s.
    gram = X @ X.T
    connected = s > 0
    value = np.sum(np.diag(gram)[connected]) - s @ (A * gram) @ s
    return max(float(value), 0.0)


def smoothness_grad_matrix(A: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Gradient of :func:`smoothness_loss` w.r.t. each entry of a dense A.

    Treats ``d_i`` as the row sum of A. Entries of zero-degree rows get the
    degree-path term dropped (its factor ``sum_j A_ij ...`` is zero there).
    """
    d, s = _inv_sqrt_degree(A)
    gram = X @ X.T
    Bs = (A * gram) @ s
    d_pow = np.zeros_like(d)
    pos = d > 0
    d_pow[pos] = d[pos] ** -1.5
    # d/dA_ij of -s^T B s: direct term plus the path through s_i(d_i).
    return -gram * np.outer(s, s) + (Bs * d_pow)[:, None]


@dataclass(frozen=True)
class Graph:
    """Undirected, unweighted attributed graph with dense storage."""

    features: np.ndarray
    adjacency: np.ndarray
    labels: np.ndarray
    num_classes: int = field(default=-1)
    name: str = "graph"

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        A = np.asarray(self.adjacency, dtype=float)
        Y = np.asarray(self.labels)
        N = A.shape[0]
        if A.ndim != 2 or A.shape != (N, N):
            raise GraphError(f"adjacency must be square, got shape {A.shape}")
        if N < 1:
            raise GraphError("graph must have at least one node")
        if not np.all((A == 0) | (A == 1)):
            raise GraphError("adjacency entries must be exactly 0 or 1")
        if not np.array_equal(A, A.T):
            raise GraphError("adjacency must be symmetric")
        if np.any(np.diag(A) != 0):
            raise GraphError("adjacency diagonal must be zero")
        if X.ndim != 2 or X.shape[0] != N:
            raise GraphError(f"features must have shape ({N}, l), got {X.shape}")
        if Y.shape != (N,) or not np.issubdtype(Y.dtype, np.integer):
            raise GraphError(f"labels must be an integer vector of length {N}")
        C = self.num_classes if self.num_classes > 0 else int(Y.max()) + 1
        if Y.min() < 0 or Y.max() >= C:
            raise GraphError(f"labels must lie in [0, {C})")
        for name, value in (("features", X), ("adjacency", A), ("labels", Y.astype(np.int64))):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "num_classes", C)

    @property
    def num_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.sum() // 2)

    @property
    def adj_vector(self) -> np.ndarray:
        return matrix_to_vec(self.adjacency)

    def edge_list(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(rows.tolist(), cols.tolist()))

    def edge_density(self) -> float:
        return self.num_edges / num_pairs(self.num_nodes)

    def with_adjacency(self, A: np.ndarray) -> "Graph":
        return Graph(self.features, A, self.labels, self.num_classes, self.name)
