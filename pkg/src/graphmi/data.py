"""Dataset files and the synthetic stochastic block model."""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph, GraphError


class ParseError(ValueError):
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}, line {line}: {message}")
        self.path = str(path)
        self.line = line


@dataclass(frozen=True)
class DatasetBundle:
    edges_path: str
    features_path: str | None
    labels_path: str
    name: str = "graph"
    onehot_features: bool = False

    @classmethod
    def from_dir(cls, directory, name: str | None = None, onehot_features: bool = False):
        d = Path(directory)
        feats = d / "features.csv"
        return cls(str(d / "edges.txt"), str(feats) if feats.exists() else None,
                   str(d / "labels.txt"), name or d.name, onehot_features)


def _read_labels(path) -> np.ndarray:
    labels = []
    with open(path) as fh:
        for k, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise ParseError(path, k, f"expected an integer label, got {line!r}") from None
    return np.array(labels, dtype=np.int64)


def _read_features(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for k, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = [float(v) for v in line.split(",")]
            except ValueError:
                raise ParseError(path, k, "non-numeric feature value") from None
            if not all(np.isfinite(row)):
                raise ParseError(path, k, "non-finite feature value")
            if rows and len(row) != len(rows[0]):
                raise ParseError(path, k, f"expected {len(rows[0])} columns, got {len(row)}")
            rows.append(row)
    return np.array(rows, dtype=float)


def _read_edges(path, num_nodes: int) -> np.ndarray:
    A = np.zeros((num_nodes, num_nodes))
    with open(path) as fh:
        for k, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ParseError(path, k, f"expected 'i j', got {line.strip()!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, k, "node indices must be integers") from None
            if not (0 <= i < num_nodes and 0 <= j < num_nodes):
                raise ParseError(path, k, f"node index out of range [0, {num_nodes})")
            if i == j:
                raise ParseError(path, k, "self loops are not allowed")
            A[i, j] = A[j, i] = 1.0
    return A


def load_graph(bundle: DatasetBundle) -> Graph:
    """Load the three-file format; N is taken from the label file."""
    labels = _read_labels(bundle.labels_path)
    N = labels.size
    if N == 0:
        raise GraphError(f"{bundle.labels_path}: no labels")
    if bundle.onehot_features or bundle.features_path is None:
        X = np.eye(N)
    else:
        X = _read_features(bundle.features_path)
        if X.shape[0] != N:
            raise GraphError(f"{bundle.features_path} has {X.shape[0]} rows, labels give N={N}")
    A = _read_edges(bundle.edges_path, N)
    return Graph(X, A, labels, name=bundle.name)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_graph(graph: Graph, directory) -> DatasetBundle:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_edges(graph.edge_list(), d / "edges.txt")
    with open(d / "features.csv", "w") as fh:
        for row in graph.features:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    with open(d / "labels.txt", "w") as fh:
        fh.write("".join(f"{int(y)}\n" for y in graph.labels))
    return DatasetBundle.from_dir(d, graph.name)


def write_edges(edges, path) -> None:
    with open(path, "w") as fh:
        fh.write("".join(f"{int(i)} {int(j)}\n" for i, j in edges))


@dataclass(frozen=True)
class SbmSpec:
    nodes_per_block: int = 50
    num_blocks: int = 2
    p_in: float = 0.3
    p_out: float = 0.02
    feature_dim: int = 32
    feature_signal: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.nodes_per_block < 1 or self.num_blocks < 1 or self.feature_dim < 1:
            raise ValueError("block sizes and feature_dim must be positive")
        if not 0 <= self.p_out <= self.p_in <= 1:
            raise ValueError("need 0 <= p_out <= p_in <= 1")
        if not 0 <= self.feature_signal <= 1:
            raise ValueError("feature_signal must lie in [0, 1]")

    @property
    def num_nodes(self) -> int:
        return self.nodes_per_block * self.num_blocks


def block_indicator(num_blocks: int, feature_dim: int) -> np.ndarray:
    """Block one-hot lifted to ``feature_dim`` columns: block b owns a contiguous slice."""
    lift = np.zeros((num_blocks, feature_dim))
    for b, cols in enumerate(np.array_split(np.arange(feature_dim), num_blocks)):
        lift[b, cols] = 1.0
    return lift


def generate_sbm(spec: SbmSpec) -> Graph:
    edge_rng, feat_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(spec.seed).spawn(2))
    N = spec.num_nodes
    labels = np.repeat(np.arange(spec.num_blocks), spec.nodes_per_block)
    same = labels[:, None] == labels[None, :]
    prob = np.where(same, spec.p_in, spec.p_out)
    upper = np.triu(edge_rng.random((N, N)) < prob, k=1)
    A = (upper | upper.T).astype(float)
    signal = block_indicator(spec.num_blocks, spec.feature_dim)[labels]
    noise = feat_rng.random((N, spec.feature_dim))
    X = spec.feature_signal * signal + (1 - spec.feature_signal) * noise
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    X = X / np.where(norms > 0, norms, 1.0)
    return Graph(X, A, labels, spec.num_blocks, name=f"sbm-{spec.seed}")


def expected_sbm_edges(spec: SbmSpec) -> tuple[float, float]:
    """Mean and standard deviation of the SBM edge count."""
    b, k = spec.num_blocks, spec.nodes_per_block
    within = b * k * (k - 1) // 2
    across = (b * (b - 1) // 2) * k * k
    mean = within * spec.p_in + across * spec.p_out
    var = within * spec.p_in * (1 - spec.p_in) + across * spec.p_out * (1 - spec.p_out)
    return mean, float(np.sqrt(var))


def bundle_from_env(var: str = "GRAPHMI_CORA_DIR") -> DatasetBundle | None:
    path = os.environ.get(var)
    return DatasetBundle.from_dir(path, "cora") if path else None
