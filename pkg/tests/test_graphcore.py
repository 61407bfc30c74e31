import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gssdc.graphcore import (DisconnectedGraphError, GraphSpec, build_knn_sensor_graph,
                             laplacian, load_graph, load_matrix, save_graph, save_matrix,
                             spectral_decomposition)


def test_two_vertex_graph_has_single_edge():
    g = build_knn_sensor_graph(2, 1, seed=11)
    w = g.weights
    assert w.shape == (2, 2)
    assert w[0, 1] > 0 and w[0, 1] == w[1, 0]
    assert w[0, 0] == w[1, 1] == 0


def test_256_vertex_graph_is_valid():
    g = build_knn_sensor_graph(256, 6, seed=7)
    assert g.n_vertices == 256
    g.validate()
    assert g.is_connected()
    assert np.array_equal(g.weights, g.weights.T)


@pytest.mark.parametrize("n,k", [(10, 12), (10, 10), (5, 0), (1, 1)])
def test_bad_knn_parameters(n, k):
    with pytest.raises(ValueError):
        build_knn_sensor_graph(n, k, seed=1)


def test_disconnected_draws_raise_with_seed():
    with pytest.raises(DisconnectedGraphError, match="seed=4"):
        build_knn_sensor_graph(60, 1, seed=4, max_retries=2)


@pytest.mark.parametrize("seed", [0, 1, 99])
def test_generator_is_deterministic(seed):
    a = build_knn_sensor_graph(40, 4, seed)
    b = build_knn_sensor_graph(40, 4, seed)
    assert a.weights.tobytes() == b.weights.tobytes()


def test_graph_validation_rejects_bad_weights():
    with pytest.raises(ValueError):
        GraphSpec([[0, 1], [2, 0]]).validate()
    with pytest.raises(ValueError):
        GraphSpec([[1, 1], [1, 0]]).validate()
    with pytest.raises(ValueError):
        GraphSpec([[0, -1], [-1, 0]]).validate()
    with pytest.raises(ValueError):
        GraphSpec(np.zeros((2, 3)))


def test_laplacian_examples():
    assert np.array_equal(laplacian(GraphSpec([[0, 1], [1, 0]])), [[1, -1], [-1, 1]])
    assert np.array_equal(laplacian(GraphSpec(np.zeros((3, 3)))), np.zeros((3, 3)))
    path = GraphSpec([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    assert np.array_equal(np.diag(laplacian(path)), [1, 2, 1])


def test_laplacian_is_psd_with_zero_row_sums():
    L = laplacian(build_knn_sensor_graph(30, 4, 2))
    assert np.allclose(L.sum(axis=1), 0, atol=1e-12)
    assert np.linalg.eigvalsh(L).min() > -1e-12


def test_two_vertex_spectrum():
    sb = spectral_decomposition(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert np.allclose(sb.eigenvalues, [0, 2], atol=1e-14)


def test_path_spectrum_matches_characteristic_polynomial():
    L = [[1, -1, 0], [-1, 2, -1], [0, -1, 1]]
    t = sympy.symbols("t")
    roots = sorted(float(r) for r in sympy.solve(sympy.Matrix(L).charpoly(t).as_expr(), t))
    sb = spectral_decomposition(np.array(L, dtype=float))
    assert np.allclose(sb.eigenvalues, roots, atol=1e-12)
    assert np.allclose(roots, [0, 1, 3])


def test_spectral_contract_on_sensor_graph():
    L = laplacian(build_knn_sensor_graph(64, 6, 5))
    sb = spectral_decomposition(L)
    U, lam = sb.eigenvectors, sb.eigenvalues
    assert np.all(np.diff(lam) >= 0)
    assert lam[0] == 0.0
    assert np.max(np.abs(U.T @ U - np.eye(64))) < 1e-8
    assert np.linalg.norm(U @ np.diag(lam) @ U.T - L) / np.linalg.norm(L) < 1e-8
    assert np.linalg.norm(L @ U - U * lam) <= 1e-8 * np.linalg.norm(L)


def test_sign_convention():
    sb = spectral_decomposition(laplacian(build_knn_sensor_graph(20, 4, 8)))
    U = sb.eigenvectors
    piv = np.argmax(np.abs(U), axis=0)
    assert np.all(U[piv, np.arange(20)] > 0)


def test_nonsymmetric_input_rejected():
    with pytest.raises(ValueError, match="symmetric"):
        spectral_decomposition(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_matrix_file_layout(tmp_path):
    p = tmp_path / "m.mat"
    save_matrix(p, [[1.0, -0.5], [1e-300, 3.0]])
    lines = p.read_text().splitlines()
    assert lines[0] == "# 2 2"
    assert lines[1] == "1,-0.5"
    assert not any(line.endswith(",") for line in lines)


def test_vector_saved_as_column(tmp_path):
    p = tmp_path / "v.mat"
    save_matrix(p, np.arange(3.0))
    assert load_matrix(p).shape == (3, 1)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_matrix_roundtrip_is_bit_exact(tmp_path_factory, M):
    p = tmp_path_factory.mktemp("rt") / "m.mat"
    save_matrix(p, M)
    assert load_matrix(p).tobytes() == M.tobytes()


def test_load_rejects_malformed(tmp_path):
    p = tmp_path / "bad.mat"
    p.write_text("# 2 2\n1,2\n3\n")
    with pytest.raises(ValueError):
        load_matrix(p)
    p.write_text("1,2\n")
    with pytest.raises(ValueError):
        load_matrix(p)


def test_graph_file_roundtrip(tmp_path):
    g = build_knn_sensor_graph(16, 3, 1)
    save_graph(tmp_path / "g.mat", g)
    assert load_graph(tmp_path / "g.mat").weights.tobytes() == g.weights.tobytes()
