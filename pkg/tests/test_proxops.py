import numpy as np
import pytest
from scipy.optimize import brentq

from gssdc.partition import VertexPartition
from gssdc.proxops import (DualBlock, matrix_rank, nuclear_norm, project_capped_simplex,
                           prox_f2, prox_h, prox_h_conj, prox_nuclear, prox_topk_rows,
                           pseudo_inverse, row_norms, topk_row_norm_sum)

from oracles import (grid_topk_two_rows, prox_f2_oracle, prox_topk_rows_oracle,
                     svt_oracle)


def one_row_partition(kind):
    # vertex 0 carries the test row; the other two fill the remaining sets
    sets = {"S": ([0], [1], [2]), "N": ([1], [0], [2]), "U": ([1], [2], [0])}[kind]
    return VertexPartition(*sets, z=2)


def test_prox_f2_forbidden_row():
    M = np.array([[9.0, 9.0], [1.0, 1.0], [1.0, 1.0]])
    out = prox_f2(M, one_row_partition("N"), 1.0, 1.0, 1.0)
    assert np.array_equal(out[0], [0.0, 0.0])


def test_prox_f2_mandatory_row():
    M = np.array([[2.0, 2.0], [1.0, 1.0], [1.0, 1.0]])
    out = prox_f2(M, one_row_partition("S"), 1.0, 5.0, 1.0)
    assert np.allclose(out[0], [1.0, 1.0])


def test_prox_f2_undecided_row_directional_oracle():
    M = np.array([[3.0, 4.0], [1.0, 1.0], [1.0, 1.0]])
    part = one_row_partition("U")
    out = prox_f2(M, part, 1.0, 1.0, 0.0)
    assert np.allclose(out[0], [2.4, 3.2], atol=1e-12)
    assert np.allclose(out, prox_f2_oracle(M, part, 1.0, 1.0, 0.0), atol=1e-8)


def test_prox_f2_threshold_zeroes_row():
    M = np.array([[0.3, 0.4], [1.0, 1.0], [1.0, 1.0]])
    out = prox_f2(M, one_row_partition("U"), 1.0, 0.5, 0.2)
    assert np.array_equal(out[0], [0.0, 0.0])


def test_prox_f2_rejects_bad_shapes():
    with pytest.raises(ValueError):
        prox_f2(np.ones((4, 2)), one_row_partition("U"), 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        prox_f2(np.ones((3, 2)), one_row_partition("U"), 0.0, 1.0, 1.0)


def test_prox_nuclear_examples(rng):
    assert np.allclose(prox_nuclear(np.diag([3.0, 1.0]), 2.0), np.diag([1.0, 0.0]))
    assert np.array_equal(prox_nuclear(np.zeros((3, 2)), 1.0), np.zeros((3, 2)))
    M = rng.standard_normal((4, 3))
    s_in = np.linalg.svd(M, compute_uv=False)
    s_out = np.linalg.svd(prox_nuclear(M, 0.5), compute_uv=False)
    assert np.allclose(s_out, np.maximum(s_in - 0.5, 0), atol=1e-10)
    assert np.allclose(prox_nuclear(M, 0.5), svt_oracle(M, 0.5), atol=1e-10)


def test_prox_topk_hand_cases():
    M = np.array([[5.0, 0.0], [0.0, 1.0]])
    assert np.array_equal(prox_topk_rows(M, 0.0, 1), M)
    out1 = prox_topk_rows(M, 2.0, 1)
    assert np.allclose(row_norms(out1), [3.0, 1.0])
    assert np.allclose(grid_topk_two_rows([5.0, 1.0], 2.0, 1), [3.0, 1.0], atol=2e-4)
    out2 = prox_topk_rows(M, 2.0, 2)
    assert np.allclose(row_norms(out2), [3.0, 0.0])
    assert np.allclose(grid_topk_two_rows([5.0, 1.0], 2.0, 2), [3.0, 0.0], atol=2e-4)


def test_prox_topk_paper_literal_differs_on_hand_case():
    M = np.array([[5.0, 0.0], [0.0, 1.0]])
    lit = prox_topk_rows(M, 2.0, 1, method="paper-literal")
    assert np.allclose(row_norms(lit), [2.0, 0.0])


def test_prox_topk_grid_oracle_random_two_rows(rng):
    for _ in range(10):
        M = rng.standard_normal((2, 3)) * 2
        weight = rng.uniform(0.1, 2.0)
        K = int(rng.integers(1, 3))
        got = row_norms(prox_topk_rows(M, weight, K))
        assert np.allclose(got, grid_topk_two_rows(row_norms(M), weight, K), atol=3e-4)


def test_prox_topk_bad_args():
    with pytest.raises(ValueError):
        prox_topk_rows(np.ones((2, 2)), 1.0, 3)
    with pytest.raises(ValueError):
        prox_topk_rows(np.ones((2, 2)), -1.0, 1)
    with pytest.raises(ValueError):
        prox_topk_rows(np.ones((2, 2)), 1.0, 1, method="fast")


def test_capped_simplex_against_root_finding(rng):
    for _ in range(50):
        n = int(rng.integers(1, 9))
        y = rng.standard_normal(n) * 3
        cap = rng.uniform(0.1, 2)
        total = rng.uniform(0, n * cap)
        w = project_capped_simplex(y, cap, total)
        g = lambda tau: np.clip(y - tau, 0, cap).sum() - total  # noqa: E731
        tau = brentq(g, y.min() - cap - 1, y.max() + 1, xtol=1e-14)
        assert np.allclose(w, np.clip(y - tau, 0, cap), atol=1e-9)
        assert abs(w.sum() - total) < 1e-9


def test_capped_simplex_edges():
    assert np.allclose(project_capped_simplex([1.0, 2.0], 1.0, 2.0), [1.0, 1.0])
    assert np.allclose(project_capped_simplex([1.0, 2.0], 1.0, 0.0), [0.0, 0.0])
    with pytest.raises(ValueError):
        project_capped_simplex([1.0], 1.0, 2.0)


def test_prox_topk_matches_sorted_l1_oracle(rng):
    for _ in range(100):
        M = rng.standard_normal((int(rng.integers(1, 7)), int(rng.integers(1, 5))))
        K = int(rng.integers(0, M.shape[0] + 1))
        weight = rng.uniform(0, 2)
        assert np.allclose(prox_topk_rows(M, weight, K), prox_topk_rows_oracle(M, weight, K),
                           atol=1e-10)


# optimality and nonexpansiveness, checked by random comparison points

def _f2_value(Y, part, lam, delta):
    if np.any(Y[part.forbidden] != 0):
        return np.inf
    return lam * row_norms(Y[part.undecided]).sum() + 0.5 * delta * np.sum(Y**2)


def _random_partition(rng, n):
    perm = rng.permutation(n)
    a, b = sorted(rng.integers(0, n + 1, size=2))
    return VertexPartition(perm[:a], perm[a:b], perm[b:], z=a)


def _candidates(rng, p, n=200, zero_rows=()):
    for k in range(n):
        scale = 10.0 ** rng.uniform(-4, 0.5)
        Y = p + scale * rng.standard_normal(p.shape) if k % 2 else rng.standard_normal(p.shape) * 3
        Y[list(zero_rows)] = 0.0
        yield Y


@pytest.mark.parametrize("which", ["f2", "nuclear", "topk"])
def test_prox_optimality(rng, which):
    for _ in range(50):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 5))
        M = rng.standard_normal((n, m)) * 2
        gamma = rng.uniform(0.1, 2)
        zero_rows = ()
        if which == "f2":
            part = _random_partition(rng, n)
            lam, delta = rng.uniform(0, 2), rng.uniform(0, 1)
            f = lambda Y: _f2_value(Y, part, lam, delta)  # noqa: E731
            p = prox_f2(M, part, gamma, lam, delta)
            zero_rows = part.forbidden
        elif which == "nuclear":
            f = nuclear_norm
            p = prox_nuclear(M, gamma)
        else:
            K = int(rng.integers(0, n + 1))
            lam = rng.uniform(0, 2)
            f = lambda Y: lam * topk_row_norm_sum(Y, K)  # noqa: E731
            p = prox_topk_rows(M, gamma * lam, K)
        val = f(p) + np.sum((p - M) ** 2) / (2 * gamma)
        for Y in _candidates(rng, p, zero_rows=zero_rows):
            assert val <= f(Y) + np.sum((Y - M) ** 2) / (2 * gamma) + 1e-12


@pytest.mark.parametrize("which", ["f2", "nuclear", "topk"])
def test_prox_nonexpansive(rng, which):
    for _ in range(100):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 5))
        M1, M2 = rng.standard_normal((2, n, m)) * 2
        if which == "f2":
            part = _random_partition(rng, n)
            op = lambda M: prox_f2(M, part, 0.7, 1.1, 0.3)  # noqa: E731
        elif which == "nuclear":
            op = lambda M: prox_nuclear(M, 0.8)  # noqa: E731
        else:
            K = int(rng.integers(0, n + 1))
            op = lambda M: prox_topk_rows(M, 0.9, K)  # noqa: E731
        assert np.linalg.norm(op(M1) - op(M2)) <= np.linalg.norm(M1 - M2) + 1e-12


def test_prox_topk_preserves_row_directions(rng):
    for _ in range(50):
        M = rng.standard_normal((6, 3))
        out = prox_topk_rows(M, rng.uniform(0, 3), int(rng.integers(1, 7)))
        for r_in, r_out in zip(M, out):
            # out = c * in with c >= 0
            c = r_out @ r_in / (r_in @ r_in)
            assert c >= 0
            assert np.allclose(r_out, c * r_in, atol=1e-12)


def test_prox_f2_forbidden_rows_bitwise_zero(rng):
    for _ in range(20):
        part = _random_partition(rng, 8)
        out = prox_f2(rng.standard_normal((8, 3)) * 1e3, part, 0.5, 0.1, 0.1)
        assert np.all(out[part.forbidden] == 0.0)
        assert not np.signbit(out[part.forbidden]).any()


def _random_block(rng):
    return DualBlock(rng.standard_normal((int(rng.integers(0, 5)), 3)),
                     rng.standard_normal((int(rng.integers(0, 6)), 3)))


def test_moreau_identity(rng):
    for _ in range(100):
        Z = _random_block(rng)
        gamma, lam = rng.uniform(0.05, 3), rng.uniform(0, 2)
        K = int(rng.integers(0, Z.z2.shape[0] + 1))
        resid = prox_h_conj(Z, gamma, lam, K) + gamma * prox_h(Z / gamma, 1 / gamma, lam, K) - Z
        assert resid.norm() <= 1e-10


def test_conjugate_of_zero_function_gives_zero(rng):
    Z = DualBlock(np.zeros((0, 2)), rng.standard_normal((4, 2)))
    out = prox_h_conj(Z, 0.7, 0.0, 2)
    assert out.z1.shape == (0, 2)
    assert np.allclose(out.z2, 0.0, atol=1e-15)


def test_conjugate_prox_blockwise(rng):
    Z = DualBlock(rng.standard_normal((3, 2)), rng.standard_normal((3, 2)))
    g, lam, K = 0.7, 0.9, 2
    out = prox_h_conj(Z, g, lam, K)
    assert np.allclose(out.z1, Z.z1 - g * svt_oracle(Z.z1 / g, 1 / g), atol=1e-12)
    assert np.allclose(out.z2, Z.z2 - g * prox_topk_rows_oracle(Z.z2 / g, lam / g, K), atol=1e-12)


def test_conjugate_prox_lands_in_dual_ball(rng):
    # prox of gamma h* is a projection onto the dual-norm balls of h
    for _ in range(30):
        Z = DualBlock(rng.standard_normal((3, 4)) * 5, rng.standard_normal((6, 4)) * 5)
        lam, K = 0.8, 2
        out = prox_h_conj(Z, 0.3, lam, K)
        assert np.linalg.norm(out.z1, 2) <= 1 + 1e-10
        nrm = row_norms(out.z2)
        assert nrm.max() <= lam + 1e-10 and nrm.sum() <= K * lam + 1e-10


def test_pseudo_inverse_examples(rng):
    assert np.allclose(pseudo_inverse(np.eye(3)), np.eye(3))
    assert np.array_equal(pseudo_inverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))
    A = rng.standard_normal((5, 3))
    assert np.max(np.abs(pseudo_inverse(A) @ A - np.eye(3))) < 1e-9
    assert pseudo_inverse(np.zeros((2, 3))).shape == (3, 2)


def test_penrose_identities(rng):
    for shape in [(5, 3), (3, 5), (4, 4)]:
        A = rng.standard_normal(shape)
        A[:, 0] = A[:, 1]  # rank deficient
        P = pseudo_inverse(A)
        tol = 1e-8
        assert np.linalg.norm(A @ P @ A - A) <= tol * np.linalg.norm(A)
        assert np.linalg.norm(P @ A @ P - P) <= tol * np.linalg.norm(P)
        assert np.linalg.norm((A @ P).T - A @ P) <= tol
        assert np.linalg.norm((P @ A).T - P @ A) <= tol
        assert matrix_rank(A) == np.linalg.matrix_rank(A)
