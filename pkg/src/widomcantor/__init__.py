"""Certified Widom factors for quadratic-preimage Cantor sets.

The package builds weakly equilibrium Cantor sets from a sequence of gap
ratios, evaluates the associated Chebyshev and residual polynomials, brackets
capacities, Green functions, and Harnack comparison constants with certified
interval enclosures, and verifies lower bounds for the sup, L2, and residual
Widom factors at arbitrary precision.
"""

from .numerics import (
    DEFAULT_POLICY,
    DepthExhausted,
    LogScalar,
    PrecisionExhausted,
    PrecisionPolicy,
)
from .sequences import (
    HorizonExceeded,
    RegularizedSequence,
    SequenceError,
    SequenceSpec,
    check_regular,
    regularize,
    tail_decay,
)
from .cantor import (
    CantorModel,
    CertificateUnavailable,
    Gamma,
    GapLocation,
    Level,
    MAX_LEVEL,
    TailCertificate,
)
from .potential import (
    GreenBracket,
    HarnackBracket,
    green_bracket_level,
    green_level,
    green_reference_log,
    green_set_bracket,
    harnack_bracket,
    harnack_one_slit,
)
from .widom import (
    FactorBracket,
    ResidualPolynomial,
    Thm1Row,
    Thm2Row,
    alternating_set,
    check_thm1,
    check_thm2,
    residual_widom_bracket,
    verify_alternation,
    widom_l2_block_lower,
    widom_l2_dyadic,
    widom_sup_dyadic,
)
from .oracle import (
    MonicFit,
    QuadMeasure,
    arcsine_measure,
    moments,
    monic_min_norm,
    pullback_quadrature,
    quad_norm,
    widom_l2_oracle,
)
from .invariants import CheckResult, run_invariant_suite

__version__ = "0.1.0"

__all__ = [
    "CantorModel",
    "CertificateUnavailable",
    "CheckResult",
    "DEFAULT_POLICY",
    "DepthExhausted",
    "FactorBracket",
    "Gamma",
    "GapLocation",
    "GreenBracket",
    "HarnackBracket",
    "HorizonExceeded",
    "Level",
    "LogScalar",
    "MAX_LEVEL",
    "MonicFit",
    "PrecisionExhausted",
    "PrecisionPolicy",
    "QuadMeasure",
    "RegularizedSequence",
    "ResidualPolynomial",
    "SequenceError",
    "SequenceSpec",
    "TailCertificate",
    "Thm1Row",
    "Thm2Row",
    "alternating_set",
    "arcsine_measure",
    "check_regular",
    "check_thm1",
    "check_thm2",
    "green_bracket_level",
    "green_level",
    "green_reference_log",
    "green_set_bracket",
    "harnack_bracket",
    "harnack_one_slit",
    "moments",
    "monic_min_norm",
    "pullback_quadrature",
    "quad_norm",
    "regularize",
    "residual_widom_bracket",
    "run_invariant_suite",
    "tail_decay",
    "verify_alternation",
    "widom_l2_block_lower",
    "widom_l2_dyadic",
    "widom_l2_oracle",
    "widom_sup_dyadic",
]
