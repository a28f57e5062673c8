"""hopfforge: zero-Hopf bifurcation analysis for a cubic Chua system.

Detects zero-Hopf equilibria of the six-parameter model, builds the
cylindrical standard form of the perturbed system with truncated power
series in the perturbation size, averages it to first and second order,
locates and classifies the averaged field's zeros, and verifies the
predicted limit cycles by direct integration of the full system.
"""

from .averaging import (
    AveragedField,
    average_first,
    average_second,
    closed_form_f_origin,
    closed_form_g_pminus,
)
from .chua import (
    ChuaParams,
    Equilibrium,
    EquilibriumKind,
    ZeroHopfPoint,
    char_poly_at,
    detect_zero_hopf,
    equilibria,
    jacobian,
    vector_field,
    zero_hopf_family_origin,
)
from .errors import (
    AmbiguousDetection,
    DivisionByZeroJet,
    FirstOrderNotZero,
    HopfforgeError,
    InvalidFamily,
    InvalidInput,
    MismatchWarning,
    NegativeLeading,
    NegativeValuation,
    NoConvergence,
    NoReturn,
    OddValuation,
    SingularChange,
    StepFailure,
)
from .series import Jet
from .solve import (
    AveragedZero,
    Cubic,
    Stability,
    closed_form_zero_origin,
    cubic_roots_complex,
    find_zeros,
    gamma,
    groebner_reference,
    predict_cycle_count,
    solve_cubic,
    stability_eigenvalues_origin,
)
from .transform import (
    PeriodicField,
    PerturbationOrigin,
    PerturbationPMinus,
    equilibrium_position,
    inverse_jordan,
    jordan_change,
    lift_orbit,
    params_at,
    params_jets,
    standard_form_origin,
    standard_form_pminus,
)
from .verify import (
    OrbitResult,
    continuation_sweep,
    count_limit_cycles,
    find_periodic_orbit,
    integrate,
    poincare_map,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousDetection",
    "AveragedField",
    "AveragedZero",
    "ChuaParams",
    "Cubic",
    "DivisionByZeroJet",
    "Equilibrium",
    "EquilibriumKind",
    "FirstOrderNotZero",
    "HopfforgeError",
    "InvalidFamily",
    "InvalidInput",
    "Jet",
    "MismatchWarning",
    "NegativeLeading",
    "NegativeValuation",
    "NoConvergence",
    "NoReturn",
    "OddValuation",
    "OrbitResult",
    "PeriodicField",
    "PerturbationOrigin",
    "PerturbationPMinus",
    "SingularChange",
    "Stability",
    "StepFailure",
    "ZeroHopfPoint",
    "average_first",
    "average_second",
    "char_poly_at",
    "closed_form_f_origin",
    "closed_form_g_pminus",
    "closed_form_zero_origin",
    "continuation_sweep",
    "count_limit_cycles",
    "cubic_roots_complex",
    "detect_zero_hopf",
    "equilibria",
    "equilibrium_position",
    "find_periodic_orbit",
    "find_zeros",
    "gamma",
    "groebner_reference",
    "integrate",
    "inverse_jordan",
    "jacobian",
    "jordan_change",
    "lift_orbit",
    "params_at",
    "params_jets",
    "poincare_map",
    "predict_cycle_count",
    "solve_cubic",
    "stability_eigenvalues_origin",
    "standard_form_origin",
    "standard_form_pminus",
    "vector_field",
    "zero_hopf_family_origin",
    "__version__",
]
