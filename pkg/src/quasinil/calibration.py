"""Calibrations, quotient spaces and the seminorms ``p_hat`` on quotient bounded operators.

A seminorm is represented as ``p(x) = ||A_p x||_2`` for a defining matrix
``A_p``. Writing ``A_p = U diag(s) V^*``, the null space ``N^p`` is spanned by
the trailing columns of ``V`` and the quotient ``X / N^p`` is identified with
``C^r`` (``r = rank A_p``) through ``z = V_r^* x``. In those coordinates
``p(x) = ||diag(s_r) z||``, so the quotient norm reproduces ``p`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionMismatch, NotQuotientBounded, ValidationError
from .linalg import RANK_TOL, as_matrix, as_square, as_vector, norm2, numerical_rank, svd

INVARIANCE_TOL = 1e-10


@dataclass(frozen=True)
class Seminorm:
    name: str
    defining_matrix: np.ndarray = field(repr=False)
    rank: int
    quotient_coords: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    null_basis: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, name: str, A, rank_tol: float = RANK_TOL) -> "Seminorm":
        A = as_matrix(A, name)
        U, s, V = svd(A)
        r = numerical_rank(s, rank_tol)
        return cls(
            name=name,
            defining_matrix=A,
            rank=r,
            quotient_coords=V[:, :r].conj().T,
            singular_values=s[:r].copy(),
            null_basis=V[:, r:],
        )

    @property
    def dim(self) -> int:
        return self.defining_matrix.shape[1]

    @property
    def weight(self) -> np.ndarray:
        """Diagonal matrix ``M_p`` with ``p(x) = ||M_p z||``."""
        return np.diag(self.singular_values).astype(complex)

    @property
    def norm(self) -> float:
        return float(self.singular_values[0]) if self.rank else 0.0

    def __call__(self, x) -> float:
        return seminorm_eval(self, x)

    def project(self, x) -> np.ndarray:
        """Quotient coordinates ``z`` of the class ``x + N^p``."""
        return self.quotient_coords @ as_vector(x, self.dim, "x")

    def quotient_norm(self, z) -> float:
        return float(np.linalg.norm(self.singular_values * np.asarray(z)))


def seminorm_eval(p: Seminorm, x) -> float:
    x = as_vector(x, None, "x")
    if x.shape[0] != p.dim:
        raise DimensionMismatch(f"seminorm {p.name!r} acts on C^{p.dim}, got length {x.shape[0]}", "x")
    return float(np.linalg.norm(p.defining_matrix @ x))


@dataclass(frozen=True)
class Calibration:
    space_dim: int
    seminorms: Tuple[Seminorm, ...]
    allow_degenerate: bool = False

    def __post_init__(self):
        if not self.seminorms:
            raise ValidationError("a calibration needs at least one seminorm", "calibration")
        names = [p.name for p in self.seminorms]
        if len(set(names)) != len(names):
            raise ValidationError(f"seminorm names must be unique, got {names}", "calibration")
        for p in self.seminorms:
            if p.dim != self.space_dim:
                raise DimensionMismatch(
                    f"seminorm acts on C^{p.dim}, space is C^{self.space_dim}", f"calibration.{p.name}"
                )
        if not self.allow_degenerate and not self.is_separating():
            raise ValidationError(
                "calibration is not separating (the seminorms share a nonzero null vector)", "calibration"
            )

    @classmethod
    def from_matrices(cls, matrices: Mapping[str, object], allow_degenerate: bool = False,
                      rank_tol: float = RANK_TOL) -> "Calibration":
        seminorms = tuple(Seminorm.from_matrix(name, A, rank_tol) for name, A in matrices.items())
        if not seminorms:
            raise ValidationError("a calibration needs at least one seminorm", "calibration")
        return cls(seminorms[0].dim, seminorms, allow_degenerate)

    @classmethod
    def euclidean(cls, n: int) -> "Calibration":
        return cls.from_matrices({"euclid": np.eye(n)})

    @classmethod
    def coordinates(cls, n: int) -> "Calibration":
        """One seminorm ``|x_i|`` per coordinate."""
        return cls.from_matrices({f"p{i + 1}": np.eye(n)[i:i + 1] for i in range(n)})

    def is_separating(self, rank_tol: float = RANK_TOL) -> bool:
        stacked = np.vstack([p.defining_matrix for p in self.seminorms])
        return numerical_rank(np.linalg.svd(stacked, compute_uv=False), rank_tol) == self.space_dim

    def names(self) -> List[str]:
        return [p.name for p in self.seminorms]

    def __iter__(self):
        return iter(self.seminorms)

    def __len__(self):
        return len(self.seminorms)

    def __getitem__(self, name: str) -> Seminorm:
        for p in self.seminorms:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass(frozen=True)
class QuotientOperator:
    seminorm_name: str
    matrix: np.ndarray
    norm: float
    weights: np.ndarray = field(repr=False)

    def weighted_norm(self) -> float:
        """``||T^p||`` in the quotient norm, computed independently of ``norm``."""
        if self.matrix.size == 0:
            return 0.0
        s = self.weights
        return _spectral_norm((s[:, None] * self.matrix) / s[None, :])


@dataclass(frozen=True)
class BoundednessDecision:
    """Outcome of :func:`is_quotient_bounded` with one entry per seminorm."""

    bounded: bool
    certificates: Dict[str, Optional[float]]
    residuals: Dict[str, float]

    def __bool__(self):
        return self.bounded


def _spectral_norm(M) -> float:
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def _check_dim(T, p: Seminorm):
    if T.shape[0] != p.dim:
        raise DimensionMismatch(f"operator acts on C^{T.shape[0]}, seminorm {p.name!r} on C^{p.dim}", "T")


def invariance_residual(T, p: Seminorm) -> float:
    """``||A_p T K_p||``: zero exactly when ``T`` maps ``N^p`` into itself."""
    if p.null_basis.shape[1] == 0:
        return 0.0
    return float(np.linalg.norm(p.defining_matrix @ T @ p.null_basis, 2))


def _invariant(T, p: Seminorm, tol: float) -> Tuple[bool, float]:
    res = invariance_residual(T, p)
    return res <= tol * p.norm * norm2(T), res


def is_quotient_bounded(T, P: Calibration, tol: float = INVARIANCE_TOL) -> BoundednessDecision:
    T = as_square(T, "T")
    certificates: Dict[str, Optional[float]] = {}
    residuals: Dict[str, float] = {}
    for p in P:
        _check_dim(T, p)
        ok, res = _invariant(T, p, tol)
        residuals[p.name] = res
        certificates[p.name] = phat(T, p, check=False) if ok else None
    return BoundednessDecision(all(c is not None for c in certificates.values()), certificates, residuals)


def require_quotient_bounded(T, P: Calibration, tol: float = INVARIANCE_TOL, name: str = "T"):
    decision = is_quotient_bounded(T, P, tol)
    if not decision:
        bad = [k for k, v in decision.certificates.items() if v is None]
        raise NotQuotientBounded(f"{name} does not leave the null space of {', '.join(bad)} invariant")
    return decision


def phat(T, p: Seminorm, check: bool = True, tol: float = INVARIANCE_TOL) -> float:
    """``p_hat(T) = sup { p(Tx) : p(x) <= 1 }``.

    ``check=False`` skips the invariance test; callers use it for operators
    built algebraically from ones already known to be quotient bounded.
    """
    T = np.asarray(T, dtype=complex)
    _check_dim(T, p)
    if check:
        ok, res = _invariant(T, p, tol)
        if not ok:
            raise NotQuotientBounded(f"N^{p.name} is not invariant (residual {res:.3e})")
    if p.rank == 0:
        return 0.0
    Tp = p.quotient_coords @ T @ p.quotient_coords.conj().T
    s = p.singular_values
    return _spectral_norm((s[:, None] * Tp) / s[None, :])


def max_phat(T, P: Calibration) -> float:
    """``max_p p_hat(T)`` without invariance checks, reduced in calibration order."""
    return max(phat(T, p, check=False) for p in P)


def induced_operator(T, p: Seminorm, tol: float = INVARIANCE_TOL) -> QuotientOperator:
    """Matrix of ``T^p`` on ``X / N^p`` in quotient coordinates."""
    T = as_square(T, "T")
    _check_dim(T, p)
    ok, res = _invariant(T, p, tol)
    if not ok:
        raise NotQuotientBounded(f"N^{p.name} is not invariant (residual {res:.3e})")
    Tp = p.quotient_coords @ T @ p.quotient_coords.conj().T
    return QuotientOperator(p.name, Tp, phat(T, p, check=False), p.singular_values.copy())


def quotient_calibration(p: Seminorm) -> Calibration:
    """The quotient ``X^p`` as a normed space: a one-seminorm calibration on ``C^rank``."""
    return Calibration.from_matrices({p.name: np.diag(p.singular_values)})
