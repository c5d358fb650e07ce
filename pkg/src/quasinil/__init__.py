"""Quasi-nilpotent equivalence and spectral theory for quotient bounded matrices.

A calibration is a finite separating family of seminorms ``p(x) = ||A_p x||``
on ``C^n``; an operator is quotient bounded when it leaves every null space
``N^p`` invariant. On that algebra the package computes quotient norms,
spectra, the radius of boundedness, Neumann inverses, the brackets
``(T - S)^[n]``, the quasi-nilpotent equivalence relation and local spectra.
"""

from .calibration import (
    BoundednessDecision,
    Calibration,
    QuotientOperator,
    Seminorm,
    induced_operator,
    invariance_residual,
    is_quotient_bounded,
    max_phat,
    phat,
    quotient_calibration,
    seminorm_eval,
)
from .corpus import KINDS, generate_corpus
from .equivalence import (
    BracketSequence,
    EquivalenceVerdict,
    bracket_direct,
    bracket_resolvent_series,
    bracket_sequence,
    bracket_terms,
    convolution_identity_check,
    cutoff,
    decide_equivalence,
    decide_on_quotients,
    series_convergence_check,
)
from .errors import *  # noqa: F401,F403
from .linalg import (
    SpectralDecomposition,
    default_cluster_tol,
    eigendecompose,
    hausdorff,
    riesz_projections,
    schur,
    semisimple_part,
)
from .local import (
    LocalAnalysis,
    LocalSpectrum,
    local_resolvent,
    local_resolvent_derivatives,
    local_spectrum,
    same_local_spectrum,
    transfer_local_resolvent,
)
from .scenario import Scenario, loads_scenario, parse_scenario
from .spectral import (
    NeumannResult,
    SpectralReport,
    neumann_inverse,
    neumann_series,
    qp_spectrum,
    radius_estimate,
    radius_exact,
    resolvent,
    resolvent_derivative,
    resolvent_limits_check,
)

__version__ = "0.1.0"
