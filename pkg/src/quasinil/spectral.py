"""Spectral theory in the algebra of quotient bounded operators.

In finite dimension every quotient bounded operator is a bounded element,
its resolvent is rational and vanishes at infinity, so the operator is
always regular and the Waelbroeck spectrum coincides with the spectrum
computed here (as a subset of the plane). :class:`SpectralReport` records
that as a flag instead of recomputing it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .calibration import Calibration, induced_operator, max_phat, require_quotient_bounded
from .errors import (
    ConvergenceFailure,
    Overflow,
    RadiusNotLessThanOne,
    SingularMatrix,
    SpectrumHit,
    ValidationError,
)
from .linalg import (
    as_square,
    cluster_points,
    default_cluster_tol,
    eigendecompose,
    solve,
)


def _spectral_radius(M, cluster_tol: float) -> float:
    if M.size == 0:
        return 0.0
    # Cluster means, not raw eigenvalues: a defective eigenvalue of multiplicity m
    # splits by about eps^(1/m), while the mean of the split cluster is accurate.
    return float(np.max(np.abs(eigendecompose(M, cluster_tol).eigenvalues)))


def radius_exact(T, P: Calibration, cluster_tol: Optional[float] = None) -> float:
    """Radius of boundedness ``r_P(T) = max_p rho(T^p)``."""
    T = as_square(T, "T")
    require_quotient_bounded(T, P)
    tol = default_cluster_tol(T) if cluster_tol is None else cluster_tol
    return max(_spectral_radius(induced_operator(T, p).matrix, tol) for p in P)


class PowerCache:
    """Integer powers of a matrix, each obtained from one multiplication.

    ``T^n = T^(2^k) T^(n - 2^k)`` with ``2^k`` the largest power of two not
    exceeding ``n``; the dyadic powers come from repeated squaring.
    """

    def __init__(self, T):
        self.T = np.asarray(T, dtype=complex)
        self._powers = {0: np.eye(self.T.shape[0], dtype=complex), 1: self.T}

    def __getitem__(self, n: int) -> np.ndarray:
        if n in self._powers:
            return self._powers[n]
        k = 1 << (n.bit_length() - 1)
        if k == n:
            half = self[n // 2]
            result = half @ half
        else:
            result = self[k] @ self[n - k]
        self._powers[n] = result
        return result


def radius_estimate(T, P: Calibration, n_max: int = 64) -> List[float]:
    """``[g_1, ..., g_{n_max}]`` with ``g_n = max_p p_hat(T^n)^(1/n)``."""
    if n_max < 4:
        raise ValidationError("n_max must be at least 4", "n_max")
    T = as_square(T, "T")
    require_quotient_bounded(T, P)
    powers = PowerCache(T)
    out = []
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            Tn = powers[n]
            if not np.all(np.isfinite(Tn)):
                raise Overflow(f"T^{n} overflowed", last_n=n - 1)
            b = max_phat(Tn, P)
            if not math.isfinite(b):
                raise Overflow(f"p_hat(T^{n}) overflowed", last_n=n - 1)
            out.append(b ** (1.0 / n))
    return out


@dataclass(frozen=True)
class NeumannResult:
    inverse: np.ndarray
    terms: int
    certificate_power: int
    certificate_ratio: float
    tail_bound: float
    residual: float


def neumann_series(T, P: Calibration, tol: float = 1e-10, max_terms: int = 100000) -> NeumannResult:
    """Truncated ``sum_n T^n`` with a certified geometric tail.

    The certificate is the first ``n0`` with ``g = max_p p_hat(T^n0)^(1/n0) < 1``;
    then ``p_hat(T^(q n0 + j)) <= g^(q n0) p_hat(T^j)`` bounds the tail.
    """
    T = as_square(T, "T")
    r = radius_exact(T, P)
    if r >= 1 - 1e-9:
        raise RadiusNotLessThanOne(f"radius of boundedness {r:.12g} is not below 1")
    n = T.shape[0]
    powers = PowerCache(T)
    n0, g = None, None
    for m in range(1, 64 * n + 1):
        if not np.all(np.isfinite(powers[m])):
            raise Overflow(f"T^{m} overflowed before a decay certificate appeared", last_n=m - 1)
        gm = max_phat(powers[m], P) ** (1.0 / m)
        if gm < 1.0:
            n0, g = m, gm
            break
    if n0 is None:
        raise ConvergenceFailure("no power of T certifies geometric decay")
    head = sum(max_phat(powers[j], P) for j in range(n0))
    ratio = g ** n0
    total = np.zeros_like(T)
    N = 0
    bound = math.inf
    while True:
        for j in range(n0):
            total = total + powers[N + j]
        N += n0
        bound = (ratio ** (N // n0)) * head / (1.0 - ratio) if ratio < 1 else math.inf
        if bound <= tol or ratio == 0.0:
            break
        if N > max_terms:
            raise ConvergenceFailure(f"tail bound {bound:.3e} above {tol:.1e} after {N} terms")
    I = np.eye(n, dtype=complex)
    residual = max_phat((I - T) @ total - I, P)
    return NeumannResult(total, N, n0, g, 0.0 if ratio == 0.0 else bound, residual)


def neumann_inverse(T, P: Calibration, tol: float = 1e-10) -> np.ndarray:
    """``(I - T)^{-1}`` as a Neumann series; requires ``r_P(T) < 1``."""
    return neumann_series(T, P, tol).inverse


def resolvent(T, lam: complex) -> np.ndarray:
    """``R(lam, T) = (lam I - T)^{-1}``."""
    T = as_square(T, "T")
    I = np.eye(T.shape[0], dtype=complex)
    try:
        return solve(lam * I - T, I)
    except SingularMatrix as exc:
        raise SpectrumHit(f"{lam} is numerically in the spectrum: {exc}") from exc


def resolvent_derivative(T, lam: complex, n: int) -> np.ndarray:
    """``d^n/dlam^n R(lam, T) = (-1)^n n! R(lam, T)^(n+1)``."""
    if n < 0:
        raise ValidationError("derivative order must be non-negative", "n")
    R = resolvent(T, lam)
    return (-1) ** n * math.factorial(n) * np.linalg.matrix_power(R, n + 1)


@dataclass(frozen=True)
class SpectrumCluster:
    value: complex
    seminorms: List[str]


@dataclass(frozen=True)
class SpectralReport:
    qp_spectrum: List[SpectrumCluster]
    ambient_spectrum: np.ndarray
    ambient_multiplicities: List[int]
    radius_of_boundedness: float
    regular: bool
    per_seminorm_radii: Dict[str, float]
    per_seminorm_spectra: Dict[str, np.ndarray] = field(repr=False)

    @property
    def values(self) -> np.ndarray:
        return np.array([c.value for c in self.qp_spectrum], dtype=complex)


def qp_spectrum(T, P: Calibration, cluster_tol: Optional[float] = None) -> SpectralReport:
    """``sigma(Q_P, T)`` as the union of the spectra of the quotient operators."""
    T = as_square(T, "T")
    require_quotient_bounded(T, P)
    tol = default_cluster_tol(T) if cluster_tol is None else cluster_tol
    ambient = eigendecompose(T, tol)
    points, owners = [], []
    radii: Dict[str, float] = {}
    spectra: Dict[str, np.ndarray] = {}
    for p in P:
        Tp = induced_operator(T, p).matrix
        if Tp.size == 0:
            spectra[p.name] = np.zeros(0, dtype=complex)
            radii[p.name] = 0.0
            continue
        reps = eigendecompose(Tp, tol).eigenvalues
        spectra[p.name] = reps
        radii[p.name] = float(np.max(np.abs(reps)))
        points.extend(reps)
        owners.extend([p.name] * len(reps))
    clusters: List[SpectrumCluster] = []
    if points:
        merged, labels = cluster_points(points, tol)
        order = P.names()
        for k, value in enumerate(merged):
            names = {owners[i] for i, lab in enumerate(labels) if lab == k}
            clusters.append(SpectrumCluster(complex(value), [nm for nm in order if nm in names]))
    return SpectralReport(
        qp_spectrum=clusters,
        ambient_spectrum=ambient.eigenvalues,
        ambient_multiplicities=list(ambient.multiplicities),
        radius_of_boundedness=max(radii.values()),
        regular=True,
        per_seminorm_radii=radii,
        per_seminorm_spectra=spectra,
    )


@dataclass(frozen=True)
class LimitRow:
    radius: float
    max_resolvent: float
    max_deviation: float
    resolvent_bound: float
    deviation_bound: float
    bounds_apply: bool

    @property
    def within_bounds(self) -> bool:
        return self.max_resolvent <= self.resolvent_bound and self.max_deviation <= self.deviation_bound


@dataclass(frozen=True)
class LimitsReport:
    rows: List[LimitRow]
    radius_of_boundedness: float

    @property
    def decreasing(self) -> bool:
        rs = sorted(self.rows, key=lambda row: row.radius)
        return all(
            b.max_resolvent < a.max_resolvent and b.max_deviation <= a.max_deviation
            for a, b in zip(rs, rs[1:])
        )

    @property
    def ok(self) -> bool:
        return self.decreasing and all(r.within_bounds for r in self.rows if r.bounds_apply)


def resolvent_limits_check(T, P: Calibration, radii: Sequence[float], samples: int = 16) -> LimitsReport:
    """Sample ``R(lam, T) -> 0`` and ``R(1, T/lam) -> I`` on circles ``|lam| = r``."""
    T = as_square(T, "T")
    r_p = radius_exact(T, P)
    n = T.shape[0]
    I = np.eye(n, dtype=complex)
    t_hat = max_phat(T, P)
    rows = []
    for r in radii:
        if not r > 1.1 * r_p:
            raise ValidationError(f"radius {r} must exceed 1.1 * r_P(T) = {1.1 * r_p:.6g}", "radii")
        worst_r, worst_d = 0.0, 0.0
        for k in range(samples):
            lam = r * np.exp(2j * np.pi * (k + 0.25) / samples)
            R = resolvent(T, lam)
            try:
                R1 = solve(I - T / lam, I)
            except SingularMatrix as exc:
                raise SpectrumHit(str(exc)) from exc
            worst_r = max(worst_r, max_phat(R, P))
            worst_d = max(worst_d, max_phat(R1 - I, P))
        rows.append(LimitRow(float(r), worst_r, worst_d, 2.0 / r, 2.0 * t_hat / r, r >= 2.0 * (1.0 + r_p)))
    return LimitsReport(rows, r_p)
