"""Local resolvents and local spectra.

For a finite-dimensional operator the maximal analytic solution of
``(lam I - T) f(lam) = x`` is rational: split ``x`` along the generalized
eigenspaces, invert ``lam I - T`` on each one that ``x`` actually touches,
and the result is analytic everywhere except at the eigenvalues of those
subspaces. That set is ``sigma_T(x)``; its complement is ``rho_T(x)``.

Every operator on a finite-dimensional space has the single-valued
extension property, so these objects are always well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .calibration import Calibration
from .equivalence import (
    DEFAULT_TOL_REL,
    EquivalenceVerdict,
    bracket_terms,
    cutoff,
    decide_equivalence,
    _pair,
)
from .errors import LocalSpectrumHit, NotEquivalent, SingularMatrix
from .linalg import SpectralDecomposition, as_square, as_vector, eigendecompose, hausdorff, solve

SUPPORT_TOL = 1e-8


@dataclass(frozen=True)
class LocalSpectrum:
    support: List[int]
    points: np.ndarray
    weights: List[float] = field(repr=False)
    complement_is_rho: bool = True

    def __len__(self):
        return len(self.support)

    @property
    def empty(self) -> bool:
        return not self.support


class LocalAnalysis:
    """Spectral data of ``T`` specialised to one vector ``x``.

    Holds the decomposition so that repeated evaluations at many ``lam``
    reuse the same Riesz data.
    """

    def __init__(self, T, x, support_tol: float = SUPPORT_TOL, cluster_tol: Optional[float] = None,
                 decomposition: Optional[SpectralDecomposition] = None):
        self.T = as_square(T, "T")
        self.x = as_vector(x, self.T.shape[0], "x")
        self.decomposition = decomposition or eigendecompose(self.T, cluster_tol)
        dec = self.decomposition
        self.components = [C @ self.x for C in dec.coords]
        # The support is scale-free; normalising first keeps tiny x from underflowing to 0.
        peak = float(np.max(np.abs(self.x)))
        unit = self.x / peak if peak > 0 else self.x
        xnorm = float(np.linalg.norm(unit))
        weights = [float(np.linalg.norm(W @ (C @ unit))) for W, C in zip(dec.bases, dec.coords)]
        if xnorm == 0.0:
            support = []
        else:
            support = [i for i, w in enumerate(weights) if w > support_tol * xnorm]
        self.spectrum = LocalSpectrum(
            support=support,
            points=dec.eigenvalues[support],
            weights=[w / xnorm if xnorm else 0.0 for w in weights],
        )

    def _check(self, lam):
        dec = self.decomposition
        for i in self.spectrum.support:
            rep = dec.eigenvalues[i]
            if abs(lam - rep) <= max(dec.cluster_tol, 1e-12 * (1.0 + abs(rep))):
                raise LocalSpectrumHit(f"{lam} lies in the local spectrum (cluster at {rep})")

    def taylor_coefficients(self, lam: complex, n_max: int) -> List[np.ndarray]:
        """``[x~(lam), x~'(lam)/1!, ..., x~^(n_max)(lam)/n_max!]``."""
        self._check(lam)
        dec = self.decomposition
        n = self.T.shape[0]
        out = [np.zeros(n, dtype=complex) for _ in range(n_max + 1)]
        for i in self.spectrum.support:
            B = dec.blocks[i]
            A = lam * np.eye(B.shape[0]) - B
            y = self.components[i]
            for k in range(n_max + 1):
                try:
                    y = solve(A, y)
                except SingularMatrix as exc:
                    raise LocalSpectrumHit(f"{lam} lies in the local spectrum: {exc}") from exc
                out[k] += (-1) ** k * (dec.bases[i] @ y)
        return out

    def value(self, lam: complex) -> np.ndarray:
        return self.taylor_coefficients(lam, 0)[0]

    def derivative(self, lam: complex, n: int) -> np.ndarray:
        coeff = self.taylor_coefficients(lam, n)[n]
        return float(np.prod(np.arange(1, n + 1, dtype=float))) * coeff


def local_spectrum(T, x, support_tol: float = SUPPORT_TOL, cluster_tol: Optional[float] = None) -> LocalSpectrum:
    """Clusters ``lam_i`` of ``T`` with ``||P_i x|| > support_tol ||x||``."""
    return LocalAnalysis(T, x, support_tol, cluster_tol).spectrum


def local_resolvent(T, x, lam: complex, support_tol: float = SUPPORT_TOL,
                    cluster_tol: Optional[float] = None) -> np.ndarray:
    """Maximal analytic extension ``x~(lam)`` of ``R(lam, T) x``."""
    return LocalAnalysis(T, x, support_tol, cluster_tol).value(lam)


def local_resolvent_derivatives(T, x, lam: complex, n: int, support_tol: float = SUPPORT_TOL,
                                cluster_tol: Optional[float] = None) -> np.ndarray:
    """``x~^(n)(lam) = (-1)^n n! sum_i (lam - T|_i)^-(n+1) P_i x``."""
    return LocalAnalysis(T, x, support_tol, cluster_tol).derivative(lam, n)


INVARIANCE_TOL = 1e-8


def _transfer_by_brackets(T, S, analysis: LocalAnalysis, lam, N) -> np.ndarray:
    coeffs = analysis.taylor_coefficients(lam, N)
    brackets = bracket_terms(S, T, N)
    x1 = np.zeros(T.shape[0], dtype=complex)
    for n in range(N + 1):
        x1 += (-1) ** n * (brackets[n] @ coeffs[n])
    return x1


def _transfer_by_clusters(T, S, analysis: LocalAnalysis, lam, n_max) -> np.ndarray:
    """Same terms, grouped by the clusters of ``T``.

    With ``T W_i = W_i B_i`` and (for equivalent pairs) ``S W_i = W_i C_i``,
    ``(S - T)^[n] W_i = W_i Z_n`` where ``Z_{n+1} = C_i Z_n - Z_n B_i``,
    ``Z_0 = I``. Shifting both blocks by ``lambda_i`` leaves ``Z_n``
    unchanged, makes them nilpotent, and gives ``Z_n = 0`` for
    ``n >= 2 m_i - 1``. The ambient brackets instead carry roundoff that
    grows like the spectral spread and is then multiplied by
    ``(lam - B_i)^-(n+1)``.
    """
    analysis._check(lam)
    dec = analysis.decomposition
    n = T.shape[0]
    snorm = max(float(np.linalg.norm(S, 2)), 1.0)
    x1 = np.zeros(n, dtype=complex)
    for i in analysis.spectrum.support:
        W, B, li = dec.bases[i], dec.blocks[i], dec.eigenvalues[i]
        m = B.shape[0]
        C = dec.coords[i] @ S @ W
        leak = float(np.linalg.norm(S @ W - W @ C, 2))
        if leak > INVARIANCE_TOL * snorm * float(np.linalg.norm(W, 2)):
            raise NotEquivalent(
                f"S does not preserve the spectral subspace of T at {li} (residual {leak:.3e})"
            )
        I = np.eye(m, dtype=complex)
        Cc, Bc, A = C - li * I, B - li * I, lam * I - B
        Z = I
        y = analysis.components[i]
        acc = np.zeros(m, dtype=complex)
        for _ in range(min(2 * m - 1, n_max + 1)):
            try:
                y = solve(A, y)
            except SingularMatrix as exc:
                raise LocalSpectrumHit(f"{lam} lies in the local spectrum: {exc}") from exc
            acc += Z @ y
            Z = Cc @ Z - Z @ Bc
        x1 += W @ acc
    return x1


def transfer_local_resolvent(T, S, x, lam: complex, n_max: Optional[int] = None,
                             P: Optional[Calibration] = None, tol_rel: float = DEFAULT_TOL_REL,
                             verdict: Optional[EquivalenceVerdict] = None,
                             analysis: Optional[LocalAnalysis] = None,
                             method: str = "clusters") -> np.ndarray:
    """``x1(lam) = sum_n (-1)^n (S - T)^[n] x~^(n)(lam) / n!`` for an equivalent pair.

    ``x~`` is the local resolvent of ``T`` at ``x``; the result solves
    ``(lam I - S) x1 = x`` on ``rho_T(x)``. Brackets vanish beyond
    ``2 dim - 1`` so the sum is finite.

    ``method="brackets"`` sums the ambient terms literally. The default
    ``"clusters"`` evaluates the same terms per cluster of ``T`` (see
    :func:`_transfer_by_clusters`), which avoids the cancellation the literal
    sum suffers near non-normal Jordan blocks.
    """
    T, S = _pair(T, S)
    if method not in ("clusters", "brackets"):
        raise ValueError(f"unknown method {method!r}")
    if verdict is None:
        verdict = decide_equivalence(T, S, P or Calibration.euclidean(T.shape[0]), tol_rel)
    if not verdict.equivalent:
        raise NotEquivalent("x1 is only defined for quasi-nilpotent equivalent pairs")
    if analysis is None:
        analysis = LocalAnalysis(T, x)
    N = cutoff(T.shape[0]) if n_max is None else min(n_max, cutoff(T.shape[0]))
    if method == "brackets":
        return _transfer_by_brackets(T, S, analysis, lam, N)
    return _transfer_by_clusters(T, S, analysis, lam, N)


def same_local_spectrum(a: LocalSpectrum, b: LocalSpectrum, tol: float = 1e-7) -> bool:
    """Supports agree as point sets (cluster indices of different operators need not line up)."""
    if len(a) != len(b):
        return False
    return hausdorff(a.points, b.points) <= tol
