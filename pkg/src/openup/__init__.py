"""Rational maps with prescribed critical points or values, and open-up maps
for systems of disjoint arcs."""

from .critpoints import (
    CoefficientSystem,
    CriticalPointSpec,
    build_system,
    newton_polish,
    solve_critical_points,
    verify_critical_points,
)
from .critvalues import (
    CriticalValueSpec,
    CritvalSolution,
    CritvalState,
    PartialFractionForm,
    alternation_heuristic,
    normalize_map,
    partial_fractions,
    residuals,
    solve_critical_values,
    verify_critical_values,
    weak_hermite_solve,
)
from .errors import (
    BranchJump,
    DegenerateSpec,
    JacobianSingular,
    MultiplePole,
    NoConvergence,
    NoOpeningSolution,
    NoSolutionFound,
    OpenUpError,
    PathCollision,
    RootFindingError,
    StalledAlternation,
    ValidationError,
)
from .homotopy import SolverConfig
from .openmap import (
    Arc,
    ArcSet,
    OpenUpResult,
    exterior_injectivity,
    fiber,
    open_up,
    trace_boundary,
    verify_endpoint_fibers,
    verify_open_up,
)
from .poly import (
    ComplexPolynomial,
    RationalMap,
    RootSet,
    coeffs_from_roots,
    coprime_check,
    derivative,
    evaluate,
    rho_coefficients,
    roots,
    wronskian,
)

__version__ = "0.1.0"
