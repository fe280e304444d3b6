"""Auto-encoder post-processing with the frozen target model as encoder."""
from __future__ import annotations

import numpy as np
from scipy.special import expit

from .gcn import GcnModel, gcn_forward


def encode(model: GcnModel, a, X) -> np.ndarray:
    """Node embeddings from the target model's hidden (penultimate) layer."""
    hidden, _ = gcn_forward(model, a, X)
    return hidden


def decode(Z) -> np.ndarray:
    """Edge probabilities ``sigmoid(Z Z^T)``."""
    Z = np.asarray(Z, dtype=float)
    if not np.all(np.isfinite(Z)):
        raise ValueError("embeddings must be finite")
    return expit(Z @ Z.T)


def postprocess(model: GcnModel, a, X) -> np.ndarray:
    return decode(encode(model, a, X))
