import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from graphmi import SampleConfig, sample_binary
from graphmi.graph import matrix_to_vec
from graphmi.sampling import draw_candidates


def test_cardinality_and_zero_mass():
    scores = np.array([0.0, 0.4, 0.0, 0.1, 0.3, 0.2, 0.0, 0.5, 0.1, 0.2])
    cfg = SampleConfig(trials=30, edge_density=0.4, seed=1)
    for v in draw_candidates(scores, cfg):
        assert v.sum() == 4
        assert not v[scores == 0].any()


@given(arrays(float, 15, elements=st.floats(0, 1)), st.floats(0.07, 0.5), st.integers(0, 1000))
def test_candidates_property(scores, rho, seed):
    cfg = SampleConfig(trials=3, edge_density=rho, seed=seed)
    m = int(np.floor(rho * 15))
    if scores.sum() == 0 or np.count_nonzero(scores) < m:
        with pytest.raises(ValueError):
            draw_candidates(scores, cfg)
        return
    for v in draw_candidates(scores, cfg):
        assert v.sum() == m and set(np.unique(v)) <= {0.0, 1.0}
        assert not v[scores == 0].any()


def test_sampling_frequencies_match_normalized_scores():
    scores = np.array([0.5, 0.3, 0.2])
    cfg = SampleConfig(trials=10_000, edge_density=1 / 3 + 1e-9, seed=0)
    counts = np.sum(draw_candidates(scores, cfg), axis=0)
    assert counts.sum() == 10_000
    np.testing.assert_allclose(counts / 10_000, scores, atol=0.02)


def test_returns_argmin_over_trials():
    scores = np.linspace(0.1, 1.0, 10)
    cfg = SampleConfig(trials=8, edge_density=0.3, seed=5)
    candidates = draw_candidates(scores, cfg)
    table = {tuple(v): float(k * 7 % 5) for k, v in enumerate(candidates)}  # fixed loss per candidate
    A, losses = sample_binary(scores, lambda v: table[tuple(v)], cfg, return_losses=True)
    enumerated = [table[tuple(v)] for v in candidates]
    np.testing.assert_array_equal(losses, enumerated)
    best = int(np.argmin(enumerated))
    np.testing.assert_array_equal(matrix_to_vec(A), candidates[best])


def test_output_is_valid_adjacency_and_deterministic():
    rng = np.random.default_rng(0)
    scores = rng.random(45)
    cfg = SampleConfig(trials=5, edge_density=0.2, seed=3)
    A = sample_binary(scores, lambda v: float(v @ scores), cfg)
    B = sample_binary(scores, lambda v: float(v @ scores), cfg)
    np.testing.assert_array_equal(A, B)
    np.testing.assert_array_equal(A, A.T)
    assert not np.diag(A).any() and set(np.unique(A)) <= {0.0, 1.0}
    assert A.sum() == 2 * 9


def test_errors():
    with pytest.raises(ValueError):
        draw_candidates(np.zeros(3), SampleConfig(edge_density=0.5))
    with pytest.raises(ValueError):
        draw_candidates(np.array([1.0, 0.0, 0.0]), SampleConfig(edge_density=0.7))
    with pytest.raises(ValueError):
        draw_candidates(np.array([1.0, -0.1, 0.0]), SampleConfig(edge_density=0.4))
    with pytest.raises(ValueError):
        draw_candidates(np.ones(3), SampleConfig())  # density not granted
    with pytest.raises(ValueError):
        SampleConfig(edge_density=0.1).num_edges(3)
    with pytest.raises(ValueError):
        SampleConfig(trials=0)
