import math
import warnings

import numpy as np
import pytest

from lgpsc.errors import DimensionError, InputError
from lgpsc.numkernel import (
    as_sym_matrix,
    fix_signs,
    gram,
    largest_eigenvalue,
    left_singular_vectors,
    projector,
    projector_distance,
    sym_eig_full,
    sym_eig_smallest,
)


def _jacobi_eigenvalues(A, sweeps=100):
    """Cyclic Jacobi rotations; independent of LAPACK."""
    A = np.array(A, dtype=np.float64)
    n = A.shape[0]
    for _ in range(sweeps):
        off = math.sqrt(max(float(np.sum(A**2) - np.sum(np.diag(A) ** 2)), 0.0))
        if off < 1e-14:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) <= 1e-18 * (abs(A[p, p]) + abs(A[q, q])) or A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))


def test_jacobi_oracle_on_badly_scaled_matrix():
    M = np.diag([1e6, 1.0, 1e-6])
    M[0, 1] = M[1, 0] = 1e-9
    M[1, 2] = M[2, 1] = 1e-3
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        vals = _jacobi_eigenvalues(M)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(M), rtol=1e-9, atol=1e-8)


def _random_sym(rng, n):
    B = rng.normal(size=(n, n))
    return 0.5 * (B + B.T)


def test_diagonal_smallest():
    pairs = sym_eig_smallest(np.diag([1.0, 3.0]), 1)
    assert pairs.d == 1
    assert pairs.values[0] == pytest.approx(1.0)
    np.testing.assert_allclose(pairs.vectors[:, 0], [1.0, 0.0], atol=1e-12)


def test_two_by_two_sign_convention():
    pairs = sym_eig_smallest([[2.0, 1.0], [1.0, 2.0]], 2)
    np.testing.assert_allclose(pairs.values, [1.0, 3.0], atol=1e-12)
    r = 1.0 / np.sqrt(2.0)
    np.testing.assert_allclose(pairs.vectors[:, 0], [r, -r], atol=1e-12)
    np.testing.assert_allclose(pairs.vectors[:, 1], [r, r], atol=1e-12)


def test_matches_jacobi_oracle():
    rng = np.random.default_rng(3)
    for _ in range(5):
        M = _random_sym(rng, 5)
        np.testing.assert_allclose(sym_eig_full(M).values, _jacobi_eigenvalues(M), atol=1e-9)


def test_smallest_pairs_are_orthonormal_eigenpairs():
    rng = np.random.default_rng(11)
    M = _random_sym(rng, 12)
    pairs = sym_eig_smallest(M, 4)
    V = pairs.vectors
    assert np.all(np.diff(pairs.values) >= 0)
    np.testing.assert_allclose(V.T @ V, np.eye(4), atol=1e-8)
    fro = np.linalg.norm(M)
    for lam, v in zip(pairs.values, V.T):
        assert np.linalg.norm(M @ v - lam * v) <= 1e-7 * (1 + abs(lam)) * fro


def test_full_reconstruction():
    rng = np.random.default_rng(5)
    for n in (1, 3, 9):
        M = _random_sym(rng, n)
        pairs = sym_eig_full(M)
        R = pairs.vectors @ np.diag(pairs.values) @ pairs.vectors.T
        assert np.linalg.norm(R - M) <= 1e-7 * max(np.linalg.norm(M), 1.0)


def test_psd_smallest_nonnegative():
    rng = np.random.default_rng(0)
    B = rng.normal(size=(10, 4))
    assert sym_eig_smallest(B @ B.T, 6).values.min() >= -1e-9


def test_deterministic():
    rng = np.random.default_rng(21)
    M = _random_sym(rng, 15)
    a = sym_eig_smallest(M, 3)
    b = sym_eig_smallest(M.copy(), 3)
    assert np.array_equal(a.values, b.values)
    assert np.array_equal(a.vectors, b.vectors)


def test_sign_convention_holds():
    rng = np.random.default_rng(8)
    V = sym_eig_full(_random_sym(rng, 7)).vectors
    for col in V.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_fix_signs_tie_goes_to_lowest_index():
    V = fix_signs(np.array([[-1.0], [1.0]]))
    np.testing.assert_array_equal(V[:, 0], [1.0, -1.0])


def test_dimension_and_input_errors():
    with pytest.raises(DimensionError):
        sym_eig_smallest(np.eye(3), 4)
    with pytest.raises(DimensionError):
        sym_eig_smallest(np.eye(3), 0)
    with pytest.raises(InputError):
        sym_eig_smallest([[1.0, np.nan], [np.nan, 1.0]], 1)
    with pytest.raises(InputError):
        as_sym_matrix(np.ones((2, 3)))


def test_as_sym_matrix_is_exactly_symmetric():
    rng = np.random.default_rng(1)
    S = as_sym_matrix(rng.normal(size=(6, 6)))
    assert np.array_equal(S, S.T)


def test_gram_examples():
    np.testing.assert_array_equal(gram([[1.0, 0.0], [0.0, 1.0]]), np.eye(2))
    np.testing.assert_array_equal(gram(np.zeros((3, 2))), np.zeros((3, 3)))


def test_gram_matches_triple_loop():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(4, 3))
    expected = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            for t in range(3):
                expected[i, j] += X[i, t] * X[j, t]
    np.testing.assert_allclose(gram(X), expected, atol=1e-12)


def test_largest_eigenvalue():
    assert largest_eigenvalue(np.diag([1.0, 3.0])) == pytest.approx(3.0)
    assert largest_eigenvalue(np.eye(5)) == pytest.approx(1.0)
    assert largest_eigenvalue(np.zeros((4, 4))) == 0.0
    rng = np.random.default_rng(6)
    M = _random_sym(rng, 6)
    assert largest_eigenvalue(M) == pytest.approx(_jacobi_eigenvalues(M)[-1], abs=1e-9)


def test_left_singular_vectors_identity():
    P = projector(left_singular_vectors(np.eye(3), 2))
    np.testing.assert_allclose(P, np.diag(np.diag(P)), atol=1e-12)
    assert np.trace(P) == pytest.approx(2.0)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)


def test_left_singular_vectors_rank_one():
    u = np.array([1.0, 2.0, -2.0])
    v = np.array([3.0, 0.5])
    U = left_singular_vectors(np.outer(u, v), 1)
    np.testing.assert_allclose(np.abs(U[:, 0]), np.abs(u) / np.linalg.norm(u), atol=1e-12)


def test_left_singular_vectors_match_aat_oracle():
    rng = np.random.default_rng(9)
    A = rng.normal(size=(5, 4))
    _w, V = np.linalg.eigh(A @ A.T)
    assert projector_distance(left_singular_vectors(A, 2), V[:, -2:]) <= 1e-8


def test_left_singular_vectors_dimension_error():
    with pytest.raises(DimensionError):
        left_singular_vectors(np.ones((5, 2)), 3)
