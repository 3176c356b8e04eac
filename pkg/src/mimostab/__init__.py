"""Stability analysis of multivariable (MIMO) LTI feedback loops.

Exact rational arithmetic on transfer matrices, Smith-McMillan pole
counting, determinant and generalized Nyquist tests, uniform margins,
H-infinity robustness bounds and positive-real classification.
"""

from .config import Tolerances, get_tolerances, use_tolerances
from .exceptions import (
    ClosureFailure,
    CurvePassesThroughOrigin,
    DimensionMismatch,
    DivisionByZeroFunction,
    EigenSolveFailure,
    ImproperSystem,
    MimoStabError,
    NominalUnstable,
    NotSquare,
    ParseError,
    PointOnCurve,
    PoleEvaluation,
    RepeatedAxisPole,
    SingularLoop,
    SingularMatrix,
    UnstableOperand,
    ValidationError,
    ZeroMatrix,
    ZeroPolynomial,
)
from .nyquist import (
    ClosedCurve,
    FrequencyGrid,
    LocusSet,
    MarginReport,
    build_grid,
    det_nyquist,
    eigen_loci,
    generalized_nyquist,
    merge_loci,
    siso_segment_check,
    uniform_margins,
    winding_number,
)
from .passivity import (
    MixedReport,
    PassivityClass,
    PRTier,
    classify_pr,
    hermitian_min_eig,
    mixed_check,
    mixed_interconnect,
    passivity_interconnect,
)
from .polyrat import (
    Polynomial,
    RationalFunction,
    RootSet,
    poly_arith,
    poly_gcd,
    poly_roots,
    rat_arith,
    rat_eval,
)
from .robustness import (
    HinfResult,
    UncertaintyKind,
    UncertaintyModel,
    hinf_norm,
    perturbed_verdict,
    small_gain_check,
    uncertainty_bound,
)
from .smith_mcmillan import (
    PoleZeroReport,
    SmithMcMillanForm,
    smith_mcmillan,
    theorem1_check,
    unstable_pole_count,
)
from .systems import SystemDescription, parse_system, system_to_dict
from .tfmatrix import (
    Status,
    TransferMatrix,
    Verdict,
    closed_loop,
    direct_stability,
    tm_det,
    tm_eval,
    tm_inverse,
)

__all__ = [
    "build_grid",
    "classify_pr",
    "closed_loop",
    "ClosedCurve",
    "ClosureFailure",
    "CurvePassesThroughOrigin",
    "det_nyquist",
    "DimensionMismatch",
    "direct_stability",
    "DivisionByZeroFunction",
    "eigen_loci",
    "EigenSolveFailure",
    "FrequencyGrid",
    "generalized_nyquist",
    "get_tolerances",
    "hermitian_min_eig",
    "hinf_norm",
    "HinfResult",
    "ImproperSystem",
    "LocusSet",
    "MarginReport",
    "merge_loci",
    "MimoStabError",
    "mixed_check",
    "mixed_interconnect",
    "MixedReport",
    "NominalUnstable",
    "NotSquare",
    "parse_system",
    "ParseError",
    "passivity_interconnect",
    "PassivityClass",
    "perturbed_verdict",
    "PointOnCurve",
    "PoleEvaluation",
    "PoleZeroReport",
    "poly_arith",
    "poly_gcd",
    "poly_roots",
    "Polynomial",
    "PRTier",
    "rat_arith",
    "rat_eval",
    "RationalFunction",
    "RepeatedAxisPole",
    "RootSet",
    "SingularLoop",
    "SingularMatrix",
    "siso_segment_check",
    "small_gain_check",
    "smith_mcmillan",
    "SmithMcMillanForm",
    "Status",
    "system_to_dict",
    "SystemDescription",
    "theorem1_check",
    "tm_det",
    "tm_eval",
    "tm_inverse",
    "Tolerances",
    "TransferMatrix",
    "uncertainty_bound",
    "UncertaintyKind",
    "UncertaintyModel",
    "uniform_margins",
    "unstable_pole_count",
    "UnstableOperand",
    "use_tolerances",
    "ValidationError",
    "Verdict",
    "winding_number",
    "ZeroMatrix",
    "ZeroPolynomial",
]

__version__ = "0.1.0"
