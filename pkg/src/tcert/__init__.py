"""Spectral-gap certificates for group-ring Laplacians.

Build a truncated free resolution of a finitely presented group, encode a
sum-of-squares gap identity as a semidefinite program, solve numerically,
and round to an exact rational certificate that re-verifies independently
of any floating-point step.
"""

__version__ = "0.1.0"

from .certify import (  # noqa: F401
    Certificate,
    CertifierConfig,
    VerificationReport,
    extract_factors,
    round_and_repair,
    verify_certificate,
)
from .encoder import SOSMode, SOSProblem, encode  # noqa: F401
from .groups import (  # noqa: F401
    Ball,
    FreeWord,
    Presentation,
    enumerate_ball,
    eval_word,
    parse_presentation,
    product_index,
)
from .oracle import FiniteModule, OracleReport, cross_check  # noqa: F401
from .resolution import (  # noqa: F401
    ChainComplexData,
    LaplacianMatrix,
    build_presentation_complex,
    check_complex,
    cyclic_resolution,
    fox_derivative,
    laplacian,
)
from .ring import GroupRingElement, GroupRingMatrix  # noqa: F401
from .solver import GramSolution, SolverConfig, solve  # noqa: F401
