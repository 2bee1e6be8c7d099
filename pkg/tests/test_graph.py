import json

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from graphlms.exceptions import DimensionError, EigensolverError
from graphlms.graph import Graph, decompose, gft, inverse_gft, laplacian, load_graph, save_graph

from helpers import random_graph


def test_laplacian_small_cases():
    two = Graph(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_array_equal(laplacian(two), [[1, -1], [-1, 1]])
    np.testing.assert_array_equal(laplacian(Graph(np.zeros((3, 3)))), np.zeros((3, 3)))
    path = Graph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    np.testing.assert_array_equal(laplacian(path), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_laplacian_rows_sum_to_zero_and_psd(rng):
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(2, 30)))
        lap = laplacian(g)
        assert np.abs(lap.sum(axis=1)).max() <= 1e-12
        assert np.linalg.eigvalsh(lap)[0] >= -1e-10
        np.testing.assert_array_equal(lap, lap.T)


def test_decompose_closed_forms():
    spec = decompose(Graph(np.array([[0.0, 1.0], [1.0, 0.0]])))
    np.testing.assert_allclose(spec.eigenvalues, [0, 2], atol=1e-12)
    np.testing.assert_allclose(spec.basis[:, 0], np.ones(2) / np.sqrt(2), atol=1e-12)
    k3 = decompose(Graph(np.ones((3, 3)) - np.eye(3)))
    np.testing.assert_allclose(k3.eigenvalues, [0, 3, 3], atol=1e-12)


def test_decompose_matches_reference_solver(rng):
    g = random_graph(rng, 8)
    spec = decompose(g)
    ref = scipy.linalg.eigh(laplacian(g), eigvals_only=True)
    np.testing.assert_allclose(spec.eigenvalues, np.clip(ref, 0, None), atol=1e-10)
    assert np.abs(spec.basis.T @ spec.basis - np.eye(8)).max() < 1e-10
    recon = spec.basis @ np.diag(spec.eigenvalues) @ spec.basis.T
    assert np.abs(recon - laplacian(g)).max() < 1e-8


def test_spectrum_invariants_on_many_graphs(rng):
    for _ in range(30):
        g = random_graph(rng, int(rng.integers(1, 25)), p=rng.uniform(0, 1))
        spec = decompose(g)
        lam = spec.eigenvalues
        assert np.all(np.diff(lam) >= 0)
        assert lam[0] <= 1e-8 * max(1.0, lam[-1])
        assert np.abs(spec.basis.T @ spec.basis - np.eye(g.n_nodes)).max() < 1e-10


def test_sign_convention_and_determinism(rng):
    g = random_graph(rng, 12)
    a, b = decompose(g), decompose(g)
    assert a.basis.tobytes() == b.basis.tobytes()
    assert a.eigenvalues.tobytes() == b.eigenvalues.tobytes()
    u = a.basis
    pivot = np.argmax(np.abs(u), axis=0)
    assert np.all(u[pivot, np.arange(12)] > 0)


def test_disconnected_graph_has_multiple_zero_eigenvalues():
    w = np.zeros((6, 6))
    for i, j in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        w[i, j] = w[j, i] = 1.0
    spec = decompose(Graph(w))
    assert np.sum(spec.eigenvalues == 0.0) == 2


def test_eigensolver_failure_is_wrapped(monkeypatch):
    def boom(_):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(np.linalg, "eigh", boom)
    with pytest.raises(EigensolverError):
        decompose(Graph(np.zeros((2, 2))))


def test_gft_examples(rng):
    g = random_graph(rng, 10)
    spec = decompose(g)
    np.testing.assert_allclose(gft(spec, spec.basis[:, 0]), np.eye(10)[0], atol=1e-12)
    np.testing.assert_array_equal(gft(spec, np.zeros(10)), np.zeros(10))
    s = np.zeros(10)
    s[[2, 7]] = rng.standard_normal(2)
    np.testing.assert_allclose(gft(spec, inverse_gft(spec, s)), s, atol=1e-10)
    np.testing.assert_allclose(inverse_gft(spec, np.eye(10)[0]), spec.basis[:, 0])
    with pytest.raises(DimensionError):
        gft(spec, np.zeros(9))
    with pytest.raises(DimensionError):
        inverse_gft(spec, np.zeros(11))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 20))
def test_gft_round_trip_and_parseval(seed, n):
    rng = np.random.default_rng(seed)
    spec = decompose(random_graph(rng, n))
    x = rng.standard_normal(n)
    s = gft(spec, x)
    np.testing.assert_allclose(inverse_gft(spec, s), x, atol=1e-10)
    assert abs(np.linalg.norm(s) - np.linalg.norm(x)) <= 1e-10 * max(1.0, np.linalg.norm(x))


@pytest.mark.parametrize("w", [
    [[0, 1], [2, 0]],
    [[1, 0], [0, 0]],
    [[0, -1], [-1, 0]],
    [[0, np.nan], [np.nan, 0]],
])
def test_invalid_weights_rejected(w):
    with pytest.raises(ValueError):
        Graph(np.array(w, dtype=float))


@pytest.mark.parametrize("edges", [[(0, 0, 1.0)], [(0, 1, 1.0), (1, 0, 1.0)], [(0, 3, 1.0)], [(0, 1, -2.0)]])
def test_from_edges_rejects_bad_lists(edges):
    with pytest.raises(ValueError):
        Graph.from_edges(3, edges)


def test_json_round_trip(tmp_path, rng):
    g = random_graph(rng, 9)
    path = tmp_path / "g.json"
    save_graph(g, path)
    doc = json.loads(path.read_text())
    assert doc["n"] == 9 and all(i < j for i, j, _ in doc["edges"])
    np.testing.assert_array_equal(load_graph(path).weights, g.weights)


def test_loader_rejects_self_loop(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 3, "edges": [[1, 1, 1.0]]}))
    with pytest.raises(ValueError):
        load_graph(path)
