"""Hysteresis operators with two-dimensional inputs.

Relays switch on exits from two nested families of plane regions; weighted
ensembles of such relays form the hysteresis operator.  The package adds
memory reduction, switching-variation diagnostics, and identification of
weights and curve geometry from measurements, plus a CLI (``hyst2d``).
"""

from ._kernels import HAVE_NUMBA, active_backend, drive_grid, psi_sweep
from .errors import (
    AdmissibilityViolation,
    AmbiguousRoot,
    ConfigError,
    DegenerateGap,
    EmptyCurve,
    EmptyRegion,
    FoliationConditionViolation,
    GridTooCoarse,
    HysteresisError,
    NoIntersection,
    NoRoot,
    NotAdmissible,
    NotPiecewiseMonotone,
    OutsideDomain,
    SignalError,
    SingularJacobian,
    UnsupportedFoliation,
)
from .foliation import (
    Annulus,
    FoliationPair,
    LinearFoliation,
    ParamPair,
    RadialFoliation,
    Rectangle,
    SamplingConfig,
    TabulatedFoliation,
    ValidationReport,
    validate_foliation,
)
from .identify import (
    CurveClouds,
    IdentifiedWeight,
    TransversalCurve,
    identify_weight,
    jacobian_surface,
    mixed_derivative,
    recover_level_points,
    transition_surface,
    validate_transversal,
)
from .plane import (
    ConstantWeight,
    ExpressionWeight,
    HysteresisOutput,
    RelayGrid,
    TableWeight,
    apply_grid,
    build_grid,
    dominant_reversals,
    reduce_history,
    save_grid_csv,
)
from .relay import RelayState, trace_exit, trace_threshold, trace_threshold_k
from .signal import KSignals, Signal2D, k_signals, reduce_signal
from .variation import (
    ProbeResult,
    VariationReport,
    inverse_modulus,
    minimality_probe,
    variation_report,
)

__version__ = "0.1.0"

__all__ = [
    "HAVE_NUMBA", "active_backend", "drive_grid", "psi_sweep",
    "AdmissibilityViolation", "AmbiguousRoot", "ConfigError", "DegenerateGap",
    "EmptyCurve", "EmptyRegion", "FoliationConditionViolation", "GridTooCoarse",
    "HysteresisError", "NoIntersection", "NoRoot", "NotAdmissible",
    "NotPiecewiseMonotone", "OutsideDomain", "SignalError", "SingularJacobian",
    "UnsupportedFoliation",
    "Annulus", "FoliationPair", "LinearFoliation", "ParamPair",
    "RadialFoliation", "Rectangle", "SamplingConfig", "TabulatedFoliation",
    "ValidationReport", "validate_foliation",
    "CurveClouds", "IdentifiedWeight", "TransversalCurve", "identify_weight",
    "jacobian_surface", "mixed_derivative", "recover_level_points",
    "transition_surface", "validate_transversal",
    "ConstantWeight", "ExpressionWeight", "HysteresisOutput", "RelayGrid",
    "TableWeight", "apply_grid", "build_grid", "dominant_reversals",
    "reduce_history", "save_grid_csv",
    "RelayState", "trace_exit", "trace_threshold", "trace_threshold_k",
    "KSignals", "Signal2D", "k_signals", "reduce_signal",
    "ProbeResult", "VariationReport", "inverse_modulus", "minimality_probe",
    "variation_report",
]
