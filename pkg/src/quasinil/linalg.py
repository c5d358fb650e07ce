"""Dense complex linear algebra used throughout the package.

Everything here works on ``complex128`` numpy arrays of modest size (the
intended range is dimension <= 32). The eigensolver is a self-contained
Hessenberg + shifted QR implementation so that the spectral machinery does
not depend on which LAPACK driver numpy happens to ship with; LAPACK is only
used for the SVD.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    ClusterSeparationFailure,
    ConvergenceFailure,
    DimensionMismatch,
    SingularMatrix,
    ValidationError,
)

EPS = np.finfo(float).eps
RANK_TOL = 1e-10
PIVOT_TOL = 1e-12
DEFAULT_NODES = 64
POWER_STEPS = 30


def as_matrix(A, name="matrix") -> np.ndarray:
    """Coerce ``A`` to a finite, non-empty 2-D complex array."""
    M = np.array(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValidationError(f"expected a non-empty 2-D matrix, got shape {M.shape}", name)
    if not np.all(np.isfinite(M)):
        raise ValidationError("entries must be finite", name)
    return M


def as_square(A, name="matrix") -> np.ndarray:
    M = as_matrix(A, name)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}", name)
    return M


def as_vector(x, dim=None, name="vector") -> np.ndarray:
    v = np.array(x, dtype=complex)
    if v.ndim != 1 or v.shape[0] < 1:
        raise ValidationError(f"expected a non-empty 1-D vector, got shape {v.shape}", name)
    if not np.all(np.isfinite(v)):
        raise ValidationError("entries must be finite", name)
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected length {dim}, got {v.shape[0]}", name)
    return v


def norm2(A) -> float:
    """Estimate of the largest singular value.

    Power iteration on ``A^* A`` from a fixed start vector, never reported
    below the largest column norm (a rigorous lower bound), so the estimate
    lies in ``[||A||/sqrt(n), ||A||]``.
    """
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    scale = float(np.max(np.abs(A)))
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    A = A / scale  # keeps A^* A representable
    lower = float(np.max(np.linalg.norm(A, axis=0)))
    n = A.shape[1]
    k = np.arange(n)
    v = (1.0 + 0.37 * k) + 1j * (0.5 - 0.11 * k)
    v /= np.sqrt(np.vdot(v, v).real)
    G = A.conj().T @ A
    est = 0.0
    for _ in range(POWER_STEPS):
        w = G @ v
        nw = np.sqrt(np.vdot(w, w).real)
        if nw == 0.0:
            break
        new = np.sqrt(nw)
        v = w / nw
        if abs(new - est) <= 1e-14 * new:
            est = new
            break
        est = new
    return scale * max(est, lower)


def solve(A, B, anorm: Optional[float] = None) -> np.ndarray:
    """Solve ``A X = B`` by Gaussian elimination with partial pivoting.

    Raises :class:`SingularMatrix` when a pivot falls below
    ``PIVOT_TOL * ||A||``. Callers that already know ``||A||`` may pass it.
    """
    A = as_square(A, "A")
    B = np.array(B, dtype=complex)
    vector_rhs = B.ndim == 1
    if vector_rhs:
        B = B[:, None]
    if B.ndim != 2 or B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"right-hand side has shape {B.shape}, expected {A.shape[0]} rows", "B")
    n = A.shape[0]
    scale = norm2(A) if anorm is None else anorm
    threshold = PIVOT_TOL * scale
    LU = A.copy()
    X = B.copy()
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        pivot = abs(LU[p, k])
        if pivot <= threshold or pivot == 0.0:
            raise SingularMatrix(f"pivot {pivot:.3e} at column {k} below {threshold:.3e}")
        if p != k:
            LU[[k, p]] = LU[[p, k]]
            X[[k, p]] = X[[p, k]]
        factors = LU[k + 1:, k] / LU[k, k]
        LU[k + 1:, k:] -= np.outer(factors, LU[k, k:])
        X[k + 1:] -= np.outer(factors, X[k])
    X = back_substitute(LU, X)
    return X[:, 0] if vector_rhs else X


def back_substitute(U, B) -> np.ndarray:
    """Solve ``U X = B`` for upper-triangular ``U``."""
    n = U.shape[0]
    X = np.array(B, dtype=complex)
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            X[i] -= U[i, i + 1:] @ X[i + 1:]
        X[i] /= U[i, i]
    return X


def hessenberg(A):
    """Householder reduction ``A = Q H Q^*`` with ``H`` upper Hessenberg."""
    H = as_square(A).copy()
    n = H.shape[0]
    Q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = H[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0 or np.linalg.norm(x[1:]) == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, :])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        Q[:, k + 1:] -= 2.0 * np.outer(Q[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H, Q


def _givens(a, b):
    # unitary G with G @ [a, b] = [r, 0]
    r = np.hypot(abs(a), abs(b))
    if r == 0.0:
        return np.eye(2, dtype=complex)
    return np.array([[np.conj(a), np.conj(b)], [-b, a]], dtype=complex) / r


def _wilkinson_shift(a, b, c, d):
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mu1 = 0.5 * (a + d) + disc
    mu2 = 0.5 * (a + d) - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def schur(A, max_sweeps_per_eig: int = 30):
    """Complex Schur form ``A = Q U Q^*`` (``U`` upper triangular, ``Q`` unitary)."""
    H, Q = hessenberg(A)
    n = H.shape[0]
    anorm = max(float(np.max(np.abs(H))), np.finfo(float).tiny)
    hi = n - 1
    its = 0
    total = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            s = abs(H[lo, lo]) + abs(H[lo - 1, lo - 1])
            if s == 0.0:
                s = anorm
            if abs(H[lo, lo - 1]) <= EPS * s:
                H[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if total > max_sweeps_per_eig * n:
            raise ConvergenceFailure(f"shifted QR did not converge after {total} sweeps")
        if its % 10 == 0:
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1]) * (1 + 1j)
        else:
            mu = _wilkinson_shift(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
        x = H[lo, lo] - mu
        y = H[lo + 1, lo]
        for k in range(lo, hi):
            G = _givens(x, y)
            c0 = max(lo, k - 1)
            H[k:k + 2, c0:] = G @ H[k:k + 2, c0:]
            r1 = min(k + 2, hi)
            H[:r1 + 1, k:k + 2] = H[:r1 + 1, k:k + 2] @ G.conj().T
            Q[:, k:k + 2] = Q[:, k:k + 2] @ G.conj().T
            if k > lo:
                H[k + 1, k - 1] = 0.0
            if k < hi - 1:
                x = H[k + 1, k]
                y = H[k + 2, k]
    U = np.triu(H)
    return U, Q


def eigvals(A) -> np.ndarray:
    """Eigenvalues (with repetition) from the diagonal of the Schur form."""
    U, _ = schur(A)
    return np.diag(U).copy()


def _swap_adjacent(U, Q, k):
    t11, t22 = U[k, k], U[k + 1, k + 1]
    a, b = U[k, k + 1], t22 - t11
    r = np.hypot(abs(a), abs(b))
    if r == 0.0:
        return
    a, b = a / r, b / r
    Z = np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=complex)
    U[k:k + 2, k:] = Z.conj().T @ U[k:k + 2, k:]
    U[:k + 2, k:k + 2] = U[:k + 2, k:k + 2] @ Z
    Q[:, k:k + 2] = Q[:, k:k + 2] @ Z
    U[k + 1, k] = 0.0
    U[k, k], U[k + 1, k + 1] = t22, t11


def reorder_schur(U, Q, labels: Sequence[int]):
    """Stable reordering of a Schur form so equal labels become contiguous
    and appear in increasing label order. Returns new ``(U, Q, labels)``."""
    U = U.copy()
    Q = Q.copy()
    labels = list(labels)
    n = len(labels)
    for i in range(1, n):
        j = i
        while j > 0 and labels[j - 1] > labels[j]:
            _swap_adjacent(U, Q, j - 1)
            labels[j - 1], labels[j] = labels[j], labels[j - 1]
            j -= 1
    return np.triu(U), Q, labels


def sylvester_triangular(A, B, F):
    """Solve ``A X - X B = F`` for upper-triangular ``A`` and ``B``."""
    p, q = A.shape[0], B.shape[0]
    X = np.zeros((p, q), dtype=complex)
    for j in range(q):
        rhs = F[:, j] + X[:, :j] @ B[:j, j]
        X[:, j] = back_substitute(A - B[j, j] * np.eye(p), rhs)
    return X


def cluster_points(points, tol: float):
    """Single-linkage clustering of complex points.

    Returns ``(reps, labels)``: representatives (cluster means) sorted by
    real then imaginary part, and for each input point the index of its
    cluster in that order.
    """
    pts = np.asarray(points, dtype=complex)
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(pts[i] - pts[j]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    roots = sorted({find(i) for i in range(n)})
    members = {r: [i for i in range(n) if find(i) == r] for r in roots}
    means = {r: complex(np.mean(pts[members[r]])) for r in roots}
    order = sorted(roots, key=lambda r: (means[r].real, means[r].imag))
    reps = np.array([means[r] for r in order], dtype=complex)
    index = {r: k for k, r in enumerate(order)}
    labels = [index[find(i)] for i in range(n)]
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if abs(reps[i] - reps[j]) < 3 * tol:
                raise ClusterSeparationFailure(
                    f"clusters at {reps[i]:.6g} and {reps[j]:.6g} are within 3*cluster_tol={3 * tol:.3e} but were not merged"
                )
    return reps, labels


def default_cluster_tol(T) -> float:
    """Merge radius for eigenvalues computed from ``T``.

    With ``a = 1 + ||T||`` (input precision) and ``b = 1 + ||T - cI||``
    (spread about the mean eigenvalue ``c``) the default is
    ``max(1e-7 a, b min(5e-2, (n eps a / b)^(1/n)))``. A Jordan block of size
    ``k`` splits under a perturbation of size ``eps a`` by roughly
    ``(eps a b^(k-1))^(1/k)``; ``k = n`` is the worst case the default absorbs.
    """
    T = np.asarray(T, dtype=complex)
    n = T.shape[0]
    a = 1.0 + norm2(T)
    b = 1.0 + norm2(T - (np.trace(T) / n) * np.eye(n))
    return max(1e-7 * a, b * min(5e-2, (n * EPS * a / b) ** (1.0 / n)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalue clusters of an operator together with their Riesz data.

    ``bases[i]`` spans the generalized eigenspace of cluster ``i``,
    ``coords[i]`` are the matching rows of the inverse basis (so
    ``projections[i] == bases[i] @ coords[i]``), and ``blocks[i]`` is the
    restriction of the operator to that subspace in the basis ``bases[i]``.
    """

    eigenvalues: np.ndarray
    multiplicities: List[int]
    projections: List[np.ndarray]
    bases: List[np.ndarray]
    coords: List[np.ndarray] = field(repr=False)
    blocks: List[np.ndarray] = field(repr=False)
    raw_eigenvalues: np.ndarray = field(repr=False)
    cluster_tol: float = 0.0

    @property
    def subspace_bases(self):
        return self.bases

    def __len__(self):
        return len(self.eigenvalues)


def _block_diagonalize(U, sizes):
    """Unit block upper-triangular ``Y`` with ``Y^{-1} U Y`` block diagonal."""
    n = U.shape[0]
    Y = np.eye(n, dtype=complex)
    # Y = Y_1 diag(I, Y_rest) unrolled: decouple the leading block from the
    # trailing part, then recurse on the trailing part.
    offsets = np.cumsum([0] + list(sizes))
    for b in range(len(sizes) - 1):
        start, stop = offsets[b], offsets[b + 1]
        A = U[start:stop, start:stop]
        Bm = U[stop:, stop:]
        C = U[start:stop, stop:]
        X = sylvester_triangular(A, Bm, -C)
        Y[:, stop:] += Y[:, start:stop] @ X
    return Y


def _riesz_by_contour(T, centers, radii, nodes):
    n = T.shape[0]
    I = np.eye(n, dtype=complex)
    theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    tnorm = norm2(T)
    projections = []
    for c, r in zip(centers, radii):
        P = np.zeros((n, n), dtype=complex)
        for t in theta:
            w = r * np.exp(1j * t)
            P += w * solve((c + w) * I - T, I, anorm=abs(c + w) + tnorm)
        projections.append(P / nodes)
    return projections


def contour_radii(centers, T=None) -> np.ndarray:
    """Half the distance from each cluster to its nearest neighbour."""
    centers = np.asarray(centers, dtype=complex)
    if len(centers) == 1:
        scale = 1.0 if T is None else 1.0 + norm2(T)
        return np.array([scale])
    d = np.abs(centers[:, None] - centers[None, :])
    np.fill_diagonal(d, np.inf)
    return 0.5 * d.min(axis=1)


def riesz_projections(T, decomposition: SpectralDecomposition, nodes: int = DEFAULT_NODES):
    """Riesz projections by trapezoidal quadrature of the resolvent on circles."""
    T = as_square(T)
    centers = decomposition.eigenvalues
    return _riesz_by_contour(T, centers, contour_radii(centers, T), nodes)


def eigendecompose(T, cluster_tol: Optional[float] = None, method: str = "schur",
                   nodes: int = DEFAULT_NODES) -> SpectralDecomposition:
    """Cluster the spectrum of ``T`` and compute its Riesz projections.

    ``method="schur"`` block-diagonalizes a reordered Schur form;
    ``method="contour"`` replaces the projections by resolvent quadrature
    (bases and blocks still come from the Schur route).
    """
    T = as_square(T, "T")
    if cluster_tol is None:
        cluster_tol = default_cluster_tol(T)
    if cluster_tol <= 0:
        raise ValidationError("cluster_tol must be positive", "cluster_tol")
    U, Q = schur(T)
    raw = np.diag(U).copy()
    reps, labels = cluster_points(raw, cluster_tol)
    U, Q, labels = reorder_schur(U, Q, labels)
    sizes = [labels.count(i) for i in range(len(reps))]
    Y = _block_diagonalize(U, sizes)
    W = Q @ Y
    Winv = back_substitute(Y, Q.conj().T)
    offsets = np.cumsum([0] + sizes)
    bases, coords, blocks, projections = [], [], [], []
    for i in range(len(reps)):
        sl = slice(offsets[i], offsets[i + 1])
        Wi, Ci = W[:, sl], Winv[sl, :]
        bases.append(Wi)
        coords.append(Ci)
        blocks.append(Ci @ T @ Wi)
        projections.append(Wi @ Ci)
    if method == "contour":
        projections = _riesz_by_contour(T, reps, contour_radii(reps, T), nodes)
    elif method != "schur":
        raise ValidationError(f"unknown method {method!r}", "method")
    return SpectralDecomposition(
        eigenvalues=reps,
        multiplicities=sizes,
        projections=projections,
        bases=bases,
        coords=coords,
        blocks=blocks,
        raw_eigenvalues=raw,
        cluster_tol=float(cluster_tol),
    )


def semisimple_part(T, cluster_tol: Optional[float] = None) -> np.ndarray:
    """Diagonalizable part ``D = sum_i lambda_i P_i`` of the Jordan-Chevalley decomposition."""
    dec = eigendecompose(T, cluster_tol)
    n = dec.projections[0].shape[0]
    D = np.zeros((n, n), dtype=complex)
    for lam, P in zip(dec.eigenvalues, dec.projections):
        D += lam * P
    return D


class SVD(NamedTuple):
    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def rank(self, rank_tol: float = RANK_TOL) -> int:
        return numerical_rank(self.s, rank_tol)

    def null_space(self, rank_tol: float = RANK_TOL) -> np.ndarray:
        return self.V[:, self.rank(rank_tol):]


def svd(A) -> SVD:
    """Full SVD ``A = U diag(s) V^*`` with ``s`` descending (LAPACK backed)."""
    A = as_matrix(A)
    U, s, Vh = np.linalg.svd(A, full_matrices=True)
    return SVD(U, s, Vh.conj().T)


def numerical_rank(s, rank_tol: float = RANK_TOL) -> int:
    s = np.asarray(s, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rank_tol * s[0]))


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite sets of complex numbers."""
    a = np.asarray(list(a), dtype=complex)
    b = np.asarray(list(b), dtype=complex)
    if a.size == 0 and b.size == 0:
        return 0.0
    if a.size == 0 or b.size == 0:
        return float("inf")
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def with_multiplicity(eigenvalues, multiplicities) -> np.ndarray:
    return np.repeat(np.asarray(eigenvalues, dtype=complex), multiplicities)
