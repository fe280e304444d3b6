import numpy as np
import pytest

from graphmi import DatasetBundle, SbmSpec, generate_sbm, load_graph, write_graph
from graphmi.data import ParseError, expected_sbm_edges
from graphmi.graph import GraphError


def _bundle(tmp_path, edges, labels, features=None, onehot=False):
    (tmp_path / "edges.txt").write_text(edges)
    (tmp_path / "labels.txt").write_text(labels)
    if features is not None:
        (tmp_path / "features.csv").write_text(features)
    return DatasetBundle.from_dir(tmp_path, onehot_features=onehot)


def test_duplicate_and_reversed_edges_collapse(tmp_path):
    g = load_graph(_bundle(tmp_path, "0 1\n1 0\n", "0\n1\n", "1,0\n0,1\n"))
    np.testing.assert_array_equal(g.adjacency, [[0, 1], [1, 0]])


def test_out_of_range_edge_names_line(tmp_path):
    with pytest.raises(ParseError) as info:
        load_graph(_bundle(tmp_path, "0 1\n\n1 2\n", "0\n1\n", "1\n2\n"))
    assert info.value.line == 3 and "line 3" in str(info.value)


@pytest.mark.parametrize("edges,labels,features", [
    ("0 0\n", "0\n1\n", "1\n1\n"),
    ("0 1 2\n", "0\n1\n", "1\n1\n"),
    ("a b\n", "0\n1\n", "1\n1\n"),
    ("0 1\n", "0\nx\n", "1\n1\n"),
    ("0 1\n", "0\n1\n", "1,2\n1\n"),
    ("0 1\n", "0\n1\n", "1\nnan\n"),
])
def test_parse_errors(tmp_path, edges, labels, features):
    with pytest.raises(ParseError):
        load_graph(_bundle(tmp_path, edges, labels, features))


def test_row_count_mismatch(tmp_path):
    with pytest.raises(GraphError):
        load_graph(_bundle(tmp_path, "0 1\n", "0\n1\n0\n", "1\n2\n"))


def test_onehot_features(tmp_path):
    g = load_graph(_bundle(tmp_path, "0 2\n", "0\n1\n1\n", onehot=True))
    np.testing.assert_array_equal(g.features, np.eye(3))


def test_writer_roundtrip(tmp_path, sbm):
    back = load_graph(write_graph(sbm, tmp_path / "g"))
    np.testing.assert_array_equal(back.adjacency, sbm.adjacency)
    np.testing.assert_array_equal(back.features, sbm.features)
    np.testing.assert_array_equal(back.labels, sbm.labels)


def test_sbm_cliques():
    g = generate_sbm(SbmSpec(nodes_per_block=4, num_blocks=3, p_in=1, p_out=0, seed=2))
    same = g.labels[:, None] == g.labels[None, :]
    np.testing.assert_array_equal(g.adjacency, same & ~np.eye(12, dtype=bool))


def test_sbm_deterministic_and_normalized():
    a, b = generate_sbm(SbmSpec(seed=9)), generate_sbm(SbmSpec(seed=9))
    np.testing.assert_array_equal(a.adjacency, b.adjacency)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_allclose(np.linalg.norm(a.features, axis=1), 1.0)
    assert (a.num_nodes, a.num_classes, a.num_features) == (100, 2, 32)


def test_sbm_edge_count_within_three_sigma():
    spec = SbmSpec()
    mean, std = expected_sbm_edges(spec)
    assert mean == pytest.approx(2450 * 0.3 + 2500 * 0.02)
    for seed in range(20):
        g = generate_sbm(SbmSpec(seed=seed))
        assert abs(g.num_edges - mean) <= 3 * std


def test_sbm_spec_validation():
    with pytest.raises(ValueError):
        SbmSpec(p_in=0.1, p_out=0.2)
    with pytest.raises(ValueError):
        SbmSpec(feature_signal=1.5)
