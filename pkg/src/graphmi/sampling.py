"""Draw a binary adjacency from an edge-score vector by best-of-K weighted sampling."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import num_nodes_for, vec_to_matrix


@dataclass(frozen=True)
class SampleConfig:
    trials: int = 20
    edge_density: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.edge_density is not None and not 0 < self.edge_density <= 1:
            raise ValueError("edge_density must lie in (0, 1]")

    def num_edges(self, n: int) -> int:
        if self.edge_density is None:
            raise ValueError("edge_density must be set (or granted from the true graph)")
        m = int(np.floor(self.edge_density * n))
        if m < 1:
            raise ValueError(f"floor(edge_density * n) = {m}; need at least one edge")
        return m


def draw_candidates(scores, config: SampleConfig) -> list[np.ndarray]:
    """K binary vectors, each with exactly ``floor(rho * n)`` ones.

    Positions are drawn without replacement with probability proportional to
    the normalized scores (sequential draws, renormalized after each pick).
    """
    scores = np.asarray(scores, dtype=float)
    if np.any(scores < 0) or not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite and nonnegative")
    total = scores.sum()
    if total <= 0:
        raise ValueError("scores are all zero")
    p = scores / total
    m = config.num_edges(scores.size)
    support = int(np.count_nonzero(p))
    if m > support:
        raise ValueError(f"cannot draw {m} distinct edges from {support} nonzero-probability pairs")
    streams = np.random.SeedSequence(config.seed).spawn(config.trials)
    out = []
    for ss in streams:
        picked = np.random.default_rng(ss).choice(scores.size, size=m, replace=False, p=p)
        v = np.zeros(scores.size)
        v[picked] = 1.0
        out.append(v)
    return out


def sample_binary(scores, loss_fn: Callable[[np.ndarray], float], config: SampleConfig,
                  return_losses: bool = False):
    """Return the candidate adjacency matrix with the smallest ``loss_fn``.

    Ties go to the earliest trial.
    """
    candidates = draw_candidates(scores, config)
    losses = np.array([float(loss_fn(v)) for v in candidates])
    best = int(np.argmin(losses))
    A = vec_to_matrix(candidates[best], num_nodes_for(len(candidates[best])))
    if return_losses:
        return A, losses
    return A
