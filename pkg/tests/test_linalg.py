import numpy as np
import pytest
from hypothesis import given, settings

from quasinil.errors import ClusterSeparationFailure, SingularMatrix, ValidationError
from quasinil.linalg import (
    as_matrix,
    cluster_points,
    default_cluster_tol,
    eigendecompose,
    eigvals,
    hausdorff,
    hessenberg,
    norm2,
    schur,
    semisimple_part,
    solve,
    svd,
    sylvester_triangular,
    with_multiplicity,
)

from conftest import matrices, random_complex


def jordan_in_random_basis(rng, eig, k):
    J = eig * np.eye(k) + np.diag(np.ones(k - 1), 1)
    V = np.linalg.qr(random_complex(rng, (k, k)))[0] @ (np.eye(k) + 0.2 * np.triu(random_complex(rng, (k, k)), 1))
    return V @ J @ np.linalg.inv(V)


# -- input validation ------------------------------------------------------------------


def test_as_matrix_rejects_non_finite_and_empty():
    with pytest.raises(ValidationError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ValidationError):
        as_matrix(np.zeros((0, 2)))


# -- solve -----------------------------------------------------------------------------


def test_solve_examples():
    np.testing.assert_allclose(solve(np.eye(2), np.array([[5, 0], [0, 7]])), [[5, 0], [0, 7]])
    np.testing.assert_allclose(solve(np.diag([2.0, 4.0]), np.eye(2)), np.diag([0.5, 0.25]))
    np.testing.assert_allclose(solve(np.array([[1.0, 1.0], [0.0, 1.0]]), np.eye(2)), [[1, -1], [0, 1]])


def test_solve_singular_raises():
    with pytest.raises(SingularMatrix):
        solve(np.array([[1.0, 2.0], [2.0, 4.0]]), np.eye(2))


@given(matrices(1, 7))
def test_solve_matches_lapack(A):
    A = A + 3 * np.eye(A.shape[0])  # keep away from singular draws
    B = np.arange(A.shape[0] * 2, dtype=float).reshape(A.shape[0], 2)
    X = solve(A, B)
    np.testing.assert_allclose(X, np.linalg.solve(A, B), atol=1e-10 * (1 + np.abs(X).max()))
    assert np.linalg.norm(A @ X - B) <= 1e-12 * np.linalg.norm(A, 2) * np.linalg.norm(X) + 1e-300


# -- Schur / eigenvalues ---------------------------------------------------------------


@given(matrices(1, 8, bound=3.0))
def test_hessenberg_is_unitary_similarity(A):
    H, Q = hessenberg(A)
    n = A.shape[0]
    np.testing.assert_allclose(Q @ H @ Q.conj().T, A, atol=1e-12 * (1 + norm2(A)))
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(n), atol=1e-12)
    assert np.allclose(np.tril(H, -2), 0)


@given(matrices(1, 8, bound=3.0))
def test_schur_against_lapack_eigenvalues(A):
    U, Q = schur(A)
    n = A.shape[0]
    scale = 1 + norm2(A)
    np.testing.assert_allclose(Q @ U @ Q.conj().T, A, atol=1e-11 * scale)
    np.testing.assert_allclose(Q.conj().T @ Q, np.eye(n), atol=1e-12)
    assert np.allclose(np.tril(U, -1), 0, atol=1e-13 * scale)
    assert hausdorff(eigvals(A), np.linalg.eigvals(A)) <= 1e-8 * scale


def test_schur_handles_exceptional_cases():
    # Cyclic shift: Wilkinson shifts stall on it without an exceptional shift.
    C = np.roll(np.eye(6), 1, axis=0)
    ev = eigvals(C)
    assert hausdorff(ev, np.exp(2j * np.pi * np.arange(6) / 6)) < 1e-10
    assert np.allclose(eigvals(np.zeros((3, 3))), 0)


def test_sylvester_triangular(rng):
    A = np.triu(random_complex(rng, (3, 3))) + 3 * np.eye(3)
    B = np.triu(random_complex(rng, (4, 4))) - 3 * np.eye(4)
    F = random_complex(rng, (3, 4))
    X = sylvester_triangular(A, B, F)
    np.testing.assert_allclose(A @ X - X @ B, F, atol=1e-12)


# -- clustering ------------------------------------------------------------------------


def test_cluster_points_single_linkage_and_order():
    reps, labels = cluster_points([2.0, 1.0, 1.0 + 1e-9, 2.0 - 1e-9], 1e-6)
    np.testing.assert_allclose(reps, [1.0, 2.0], atol=1e-8)
    assert labels == [1, 0, 0, 1]


def test_cluster_points_separation_failure():
    with pytest.raises(ClusterSeparationFailure):
        cluster_points([0.0, 2e-3], 1e-3)


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6, 8])
def test_default_cluster_tol_absorbs_jordan_splitting(rng, k):
    for _ in range(10):
        T = jordan_in_random_basis(rng, 0.7 - 0.3j, k)
        dec = eigendecompose(T)
        assert len(dec) == 1 and dec.multiplicities == [k]
        assert abs(dec.eigenvalues[0] - (0.7 - 0.3j)) < 1e-9


def test_default_cluster_tol_follows_common_shift(rng):
    T = jordan_in_random_basis(rng, 0.0, 3) + np.diag([0, 0, 0])
    assert default_cluster_tol(T + 1e4 * np.eye(3)) > default_cluster_tol(T)
    assert len(eigendecompose(T + 1e4 * np.eye(3))) == 1


# -- spectral decomposition -------------------------------------------------------------


def test_eigendecompose_examples():
    d = eigendecompose(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(d.eigenvalues, [1, 2])
    np.testing.assert_allclose(d.projections[0], np.diag([1, 0]), atol=1e-14)
    np.testing.assert_allclose(d.projections[1], np.diag([0, 1]), atol=1e-14)
    for T, lam in (([[1, 1], [0, 1]], 1.0), ([[0, 1], [0, 0]], 0.0)):
        d = eigendecompose(np.array(T, dtype=float))
        np.testing.assert_allclose(d.eigenvalues, [lam])
        assert d.multiplicities == [2]
        np.testing.assert_allclose(d.projections[0], np.eye(2), atol=1e-14)


def check_projection_invariants(T, dec, tol):
    n = T.shape[0]
    assert sum(dec.multiplicities) == n
    P = dec.projections
    np.testing.assert_allclose(sum(P), np.eye(n), atol=tol)
    for i, Pi in enumerate(P):
        np.testing.assert_allclose(Pi @ Pi, Pi, atol=tol)
        np.testing.assert_allclose(T @ Pi, Pi @ T, atol=tol * (1 + norm2(T)))
        for j in range(i + 1, len(P)):
            np.testing.assert_allclose(Pi @ P[j], 0, atol=tol)


@given(matrices(1, 7, bound=2.0))
def test_projection_invariants_random(A):
    dec = eigendecompose(A)
    # Random draws can have nearly colliding eigenvalues; scale by the basis conditioning.
    cond = max(norm2(P) for P in dec.projections)
    check_projection_invariants(A, dec, 1e-9 * cond ** 2)


def test_projection_invariants_structured(rng):
    D = np.diag([1, 1, 1, 2, 2, -1j]).astype(complex)
    N = np.zeros((6, 6), dtype=complex)
    N[0, 1], N[1, 2], N[3, 4] = 1, 0.5, -0.7
    V = np.linalg.qr(random_complex(rng, (6, 6)))[0]
    T = V @ (D + N) @ V.conj().T
    dec = eigendecompose(T)
    np.testing.assert_allclose(dec.eigenvalues, [-1j, 1, 2], atol=1e-9)
    assert dec.multiplicities == [1, 3, 2]
    check_projection_invariants(T, dec, 1e-10)


def test_contour_and_block_diagonal_routes_agree(rng):
    for _ in range(6):
        D = np.diag(rng.choice([-2, -1, 0, 1, 2], 5, replace=False) + 0j)
        V = np.linalg.qr(random_complex(rng, (5, 5)))[0] @ (np.eye(5) + 0.3 * np.triu(random_complex(rng, (5, 5)), 1))
        T = V @ D @ np.linalg.inv(V)
        schur_route = eigendecompose(T)
        contour_route = eigendecompose(T, method="contour")
        for P, Q in zip(schur_route.projections, contour_route.projections):
            assert np.abs(P - Q).max() < 1e-8


def test_contour_matches_on_jordan_clusters(rng):
    T = np.zeros((4, 4), dtype=complex)
    T[:2, :2] = jordan_in_random_basis(rng, 1.0, 2)
    T[2:, 2:] = jordan_in_random_basis(rng, -1.0, 2)
    a = eigendecompose(T)
    b = eigendecompose(T, method="contour")
    for P, Q in zip(a.projections, b.projections):
        assert np.abs(P - Q).max() < 1e-8


# -- semisimple part --------------------------------------------------------------------


def test_semisimple_part_examples():
    np.testing.assert_allclose(semisimple_part(np.array([[1.0, 1.0], [0.0, 1.0]])), np.eye(2), atol=1e-14)
    np.testing.assert_allclose(semisimple_part(np.diag([1.0, 2.0])), np.diag([1, 2]), atol=1e-14)
    np.testing.assert_allclose(semisimple_part(np.array([[0.0, 1.0], [0.0, 0.0]])), 0, atol=1e-14)


def test_semisimple_part_commutes_and_leaves_nilpotent(rng):
    for k in range(2, 6):
        T = np.zeros((k + 2, k + 2), dtype=complex)
        T[:k, :k] = jordan_in_random_basis(rng, 0.5, k)
        T[k:, k:] = np.diag([2.0, -1.0])
        V = np.eye(k + 2) + 0.3 * np.triu(random_complex(rng, (k + 2, k + 2)), 1)
        T = V @ T @ np.linalg.inv(V)
        D = semisimple_part(T)
        scale = 1 + norm2(T)
        np.testing.assert_allclose(D @ T, T @ D, atol=1e-9 * scale ** 2)
        N = T - D
        assert norm2(np.linalg.matrix_power(N, k + 2)) < 1e-8 * scale ** (k + 2)


# -- SVD --------------------------------------------------------------------------------


def test_svd_examples():
    assert svd(np.zeros((2, 2))).rank() == 0
    f = svd(np.eye(2))
    np.testing.assert_allclose(f.s, [1, 1])
    assert f.rank() == 2
    g = svd(np.array([[1.0, 0.0]]))
    assert g.rank() == 1
    K = g.null_space()
    assert K.shape == (2, 1) and abs(abs(K[1, 0]) - 1) < 1e-14


@given(matrices(1, 6, square=False))
def test_svd_reconstructs(A):
    U, s, V = svd(A)
    k = len(s)
    np.testing.assert_allclose(U[:, :k] * s @ V[:, :k].conj().T, A, atol=1e-12 * (1 + s[0]))
    assert np.all(np.diff(s) <= 0)


@given(matrices(1, 8, bound=5.0, square=False))
def test_norm2_against_lapack(A):
    ref = np.linalg.norm(A, 2)
    # Power iteration from below, floored by the largest column norm.
    assert ref * (1 - 1e-3) - 1e-12 <= norm2(A) <= ref * (1 + 1e-12)


def test_hausdorff_and_multiplicity_helpers():
    assert hausdorff([], []) == 0.0
    assert hausdorff([0, 1], [1, 0]) == 0.0
    assert hausdorff([0], [0, 2]) == 2.0
    np.testing.assert_array_equal(with_multiplicity([1, 2], [2, 1]), [1, 1, 2])
