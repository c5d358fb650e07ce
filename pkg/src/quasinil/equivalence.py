"""Brackets ``(T - S)^[n]`` and quasi-nilpotent equivalence.

``(T - S)^[n] = sum_k (-1)^(n-k) C(n, k) T^k S^(n-k)`` is ``(L_T - R_S)^n``
applied to the identity, where ``L_T X = T X`` and ``R_S X = X S``. Two
facts make the finite-dimensional decision exact:

* The bracket is unchanged when the same scalar is added to ``T`` and ``S``,
  and is homogeneous of degree ``n`` under a common rescaling.
* If ``T = D + N1`` and ``S = D + N2`` share the semisimple part ``D``, then
  ``L_D - R_D`` kills ``I`` and commutes with ``L_N1 - R_N2``, which is
  nilpotent of index at most ``2 dim - 1``. Hence the brackets vanish from
  ``n* = 2 dim - 1`` on. If the semisimple parts differ the brackets grow
  like ``|lambda - mu|^n`` for some pair of eigenvalues.

So the limit in the definition is replaced by the test ``b_{n*} ~ 0``, and
the semisimple-part comparison is kept alongside as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .calibration import (
    Calibration,
    induced_operator,
    max_phat,
    quotient_calibration,
    require_quotient_bounded,
)
from .errors import BracketMismatch, DimensionMismatch, DivergenceDetected, NotEquivalent
from .linalg import as_square, as_vector, default_cluster_tol, norm2, semisimple_part
from .spectral import PowerCache

DEFAULT_TOL_REL = 1e-9
ORACLE_TOL = 1e-7
CROSSCHECK_TOL = 1e-10
CROSSCHECK_MAX_N = 12
# Centring cancels |c| from the entries but leaves roundoff of order eps ||T||;
# the base never drops below this fraction of the uncentred norms.
BASE_FLOOR = 1e-5


def _pair(T, S):
    T = as_square(T, "T")
    S = as_square(S, "S")
    if T.shape != S.shape:
        raise DimensionMismatch(f"T is {T.shape}, S is {S.shape}", "S")
    return T, S


def bracket_direct(T, S, n: int) -> np.ndarray:
    """Binomial sum for ``(T - S)^[n]`` with exact integer coefficients."""
    T, S = _pair(T, S)
    PT, PS = PowerCache(T), PowerCache(S)
    out = np.zeros_like(T)
    for k in range(n + 1):
        c = math.comb(n, k)
        term = PT[k] @ PS[n - k]
        out += (-float(c) if (n - k) % 2 else float(c)) * term
    return out


def bracket_terms(T, S, n_max: int) -> List[np.ndarray]:
    """``[(T - S)^[0], ..., (T - S)^[n_max]]`` from ``X_{n+1} = T X_n - X_n S``."""
    T, S = _pair(T, S)
    terms = [np.eye(T.shape[0], dtype=complex)]
    for _ in range(n_max):
        X = terms[-1]
        terms.append(T @ X - X @ S)
    return terms


@dataclass(frozen=True)
class BracketSequence:
    terms: List[np.ndarray] = field(repr=False)
    norms: List[float]
    roots: List[float]
    crosscheck_residual: float = 0.0


def _roots(norms):
    return [b ** (1.0 / n) for n, b in enumerate(norms) if n >= 1]


def bracket_sequence(T, S, P: Calibration, n_max: int, check: bool = True) -> BracketSequence:
    """Bracket terms with their calibration norms ``b_n = max_p p_hat``.

    The recurrence is cross-checked against :func:`bracket_direct` for
    ``n <= min(n_max, 12)``.
    """
    T, S = _pair(T, S)
    if check:
        require_quotient_bounded(T, P, name="T")
        require_quotient_bounded(S, P, name="S")
    terms = bracket_terms(T, S, n_max)
    base = norm2(T) + norm2(S)
    worst = 0.0
    for n in range(min(n_max, CROSSCHECK_MAX_N) + 1):
        res = float(np.max(np.abs(terms[n] - bracket_direct(T, S, n))))
        if res > CROSSCHECK_TOL * max(base, 1e-300) ** n:
            raise BracketMismatch(f"recurrence and binomial sum differ by {res:.3e} at n={n}")
        scale = base ** n
        worst = max(worst, res / scale if scale > 0 else res)
    norms = [max_phat(X, P) for X in terms]
    return BracketSequence(terms, norms, _roots(norms), worst)


def convolution_identity_check(T, S, R, n: int) -> float:
    """Max-entry residual of ``sum_k C(n,k) (T-S)^[k] (S-R)^[n-k] = (T-R)^[n]``."""
    T, S = _pair(T, S)
    _, R = _pair(T, R)
    ts = bracket_terms(T, S, n)
    sr = bracket_terms(S, R, n)
    lhs = np.zeros_like(T)
    for k in range(n + 1):
        lhs += float(math.comb(n, k)) * (ts[k] @ sr[n - k])
    rhs = bracket_terms(T, R, n)[n]
    return float(np.max(np.abs(lhs - rhs)))


def cutoff(dim: int) -> int:
    return 2 * dim - 1


def _weight_condition(P: Calibration) -> float:
    kappa = 1.0
    for p in P:
        if p.rank:
            kappa = max(kappa, float(p.singular_values[0] / p.singular_values[-1]))
    return kappa


def center_pair(T, S) -> Tuple[np.ndarray, np.ndarray]:
    """``(T - cI, S - cI)`` with ``c`` the mean eigenvalue of the pair."""
    n = T.shape[0]
    c = np.trace(T + S) / (2 * n)
    I = np.eye(n, dtype=complex)
    return T - c * I, S - c * I


def bracket_scale_base(T, S, P: Calibration) -> Tuple[float, float]:
    """Per-step roundoff growth for brackets of ``(T, S)`` measured by ``P``.

    ``||T - cI|| + ||S - cI||`` with ``c`` the mean eigenvalue of the pair,
    floored at ``BASE_FLOOR (||T|| + ||S||)``, and the worst conditioning of
    a seminorm weight (``p_hat <= kappa ||.||``). Pass the uncentred pair.
    """
    Tc, Sc = center_pair(T, S)
    base = max(norm2(Tc) + norm2(Sc), BASE_FLOOR * (norm2(T) + norm2(S)))
    return base, _weight_condition(P)


@dataclass(frozen=True)
class EquivalenceVerdict:
    equivalent: bool
    cutoff: int
    residual: Tuple[float, float]
    residual_reverse: Tuple[float, float]
    scale: float
    threshold: float
    oracle_equivalent: bool
    oracle_distance: float
    oracle_agrees: bool
    decay_curve: List[float]
    decay_curve_reverse: List[float]
    norms: List[float] = field(repr=False)
    norms_reverse: List[float] = field(repr=False)

    @property
    def status(self) -> str:
        if not self.oracle_agrees:
            return "oracle-disagreement"
        return "equivalent" if self.equivalent else "not-equivalent"


def _oracle(T, S, P: Calibration, cluster_tol: Optional[float]):
    """Largest semisimple-part mismatch, ambient or per quotient, against its threshold."""
    if P.is_separating():
        pairs = [(T, S)]
    else:
        pairs = []
        for p in P:
            if p.rank:
                pairs.append((induced_operator(T, p).matrix, induced_operator(S, p).matrix))
    worst_ratio, worst_dist = 0.0, 0.0
    for A, B in pairs:
        dist = norm2(semisimple_part(A, cluster_tol) - semisimple_part(B, cluster_tol))
        limit = ORACLE_TOL * (1.0 + norm2(A) + norm2(B))
        worst_dist = max(worst_dist, dist)
        worst_ratio = max(worst_ratio, dist / limit)
    return worst_ratio <= 1.0, worst_dist


def decide_equivalence(T, S, P: Calibration, tol_rel: float = DEFAULT_TOL_REL,
                       cluster_tol: Optional[float] = None) -> EquivalenceVerdict:
    """Decide ``T ~q S``: both ``b_n(T,S)`` and ``b_n(S,T)`` must vanish at ``n*`` and ``n*+1``.

    ``b_n`` is compared against ``tol_rel * kappa * base^n`` where ``base`` is
    from :func:`bracket_scale_base`; this is invariant under common shifts
    and rescalings of the pair, as the brackets are.
    """
    T, S = _pair(T, S)
    require_quotient_bounded(T, P, name="T")
    require_quotient_bounded(S, P, name="S")
    # Brackets and semisimple differences are unchanged by a common shift;
    # centring keeps roundoff proportional to the spread, not to |c|.
    if cluster_tol is None:
        cluster_tol = max(default_cluster_tol(T), default_cluster_tol(S))
    base, kappa = bracket_scale_base(T, S, P)
    T, S = center_pair(T, S)
    n_star = cutoff(T.shape[0])
    forward = bracket_sequence(T, S, P, n_star + 2, check=False)
    reverse = bracket_sequence(S, T, P, n_star + 2, check=False)

    def below(seq):
        return all(seq.norms[n] <= tol_rel * kappa * base ** n for n in (n_star, n_star + 1))

    equivalent = below(forward) and below(reverse)
    oracle_eq, oracle_dist = _oracle(T, S, P, cluster_tol)
    scale = kappa * base ** n_star
    return EquivalenceVerdict(
        equivalent=equivalent,
        cutoff=n_star,
        residual=(forward.norms[n_star], forward.norms[n_star + 1]),
        residual_reverse=(reverse.norms[n_star], reverse.norms[n_star + 1]),
        scale=scale,
        threshold=tol_rel * scale,
        oracle_equivalent=oracle_eq,
        oracle_distance=oracle_dist,
        oracle_agrees=oracle_eq == equivalent,
        decay_curve=forward.roots,
        decay_curve_reverse=reverse.roots,
        norms=forward.norms,
        norms_reverse=reverse.norms,
    )


def decide_on_quotients(T, S, P: Calibration, tol_rel: float = DEFAULT_TOL_REL) -> Dict[str, EquivalenceVerdict]:
    """Verdict for each induced pair ``(T^p, S^p)`` on its own normed quotient."""
    T, S = _pair(T, S)
    out = {}
    for p in P:
        if p.rank == 0:
            continue
        Tp = induced_operator(T, p).matrix
        Sp = induced_operator(S, p).matrix
        out[p.name] = decide_equivalence(Tp, Sp, quotient_calibration(p), tol_rel)
    return out


def bracket_resolvent_series(T, S, lam: complex, mu: complex, v, n_max: int = 500,
                             growth_window: int = 8) -> np.ndarray:
    """``sum_n (T - S)^[n] v / (mu - lam)^(n+1)``.

    With ``S = lam I`` this is the Neumann expansion of ``R(mu, T) v``; when
    ``S v = lam v`` it solves ``(mu I - T) g = v``. Truncation uses the bound
    ``||(T - S)^[n]|| ||v|| / |mu - lam|^(n+1)`` on the next term.
    """
    T, S = _pair(T, S)
    v = as_vector(v, T.shape[0], "v")
    if mu == lam:
        raise DivergenceDetected("mu must differ from lambda")
    d = mu - lam
    vnorm = float(np.linalg.norm(v))
    total = np.zeros_like(v)
    if vnorm == 0.0:
        return total
    X = np.eye(T.shape[0], dtype=complex)
    denom = d
    growing, last = 0, math.inf
    for n in range(n_max + 1):
        bound = norm2(X) * vnorm / abs(denom)
        if bound < 1e-14 * vnorm:
            break
        total = total + (X @ v) / denom
        growing = growing + 1 if bound > last else 0
        if growing >= growth_window:
            raise DivergenceDetected(f"series terms grew for {growth_window} consecutive orders (n={n})")
        last = bound
        X = T @ X - X @ S
        denom = denom * d
    return total


@dataclass(frozen=True)
class SeriesReport:
    sum: np.ndarray
    sum_reverse: np.ndarray
    nonzero_terms: int
    cauchy_residual: float
    threshold: float

    @property
    def ok(self) -> bool:
        return self.cauchy_residual <= self.threshold


def series_convergence_check(T, S, P: Calibration, tol_rel: float = DEFAULT_TOL_REL) -> SeriesReport:
    """Partial sums of ``sum_n (T - S)^[n]`` (and the reverse) are Cauchy beyond ``n*``."""
    verdict = decide_equivalence(T, S, P, tol_rel)
    if not verdict.equivalent:
        raise NotEquivalent("the series is only certified for quasi-nilpotent equivalent pairs")
    T, S = _pair(T, S)
    n_star = verdict.cutoff
    n_max = n_star + 2
    base, kappa = bracket_scale_base(T, S, P)
    worst = 0.0
    sums = []
    nonzero = 0
    for A, B in ((T, S), (S, T)):
        terms = bracket_terms(A, B, n_max)
        partial = [terms[0]]
        for X in terms[1:]:
            partial.append(partial[-1] + X)
        for n in range(n_star, n_max + 1):
            for m in range(n + 1, n_max + 1):
                worst = max(worst, max_phat(partial[m] - partial[n], P))
        sums.append(partial[n_star])
        if A is T:
            nonzero = sum(1 for n, X in enumerate(terms) if max_phat(X, P) > tol_rel * kappa * base ** n)
    threshold = 1e-10 * kappa * base ** n_star
    return SeriesReport(sums[0], sums[1], nonzero, worst, threshold)
