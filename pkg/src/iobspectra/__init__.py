"""Intrinsic optical bistability and emission spectra of a dense two-level medium."""

from .core import (
    Branch,
    BranchNotPresentError,
    IntegrationError,
    MechanismError,
    MediumParams,
    Mechanism,
    NoPhysicalRootError,
    SingularFeedbackError,
    SingularMatrixError,
    validate_mechanism,
    zeta_total,
)
from .steady_state import (
    HysteresisScan,
    ScanPoint,
    StationaryState,
    SteadyStateSolution,
    branch_solution,
    classify_stability,
    coherence,
    cubic_coefficients,
    effective_params,
    find_thresholds,
    rabi_relation_sq,
    scan_hysteresis,
    solutions_at,
    solve_inversion,
    stationary_state,
)
from .spectrum import (
    SpectrumCoefficients,
    SpectrumResult,
    default_nu_grid,
    free_atom_saturation_max,
    incoherent_spectrum,
    oracle_spectrum,
    peak_positions,
    spectrum_coefficients,
    spectrum_for_branch,
    spectrum_for_solution,
    sum_rule_ratio,
)
from .dynamics import (
    BlochState,
    NonAdiabaticWarning,
    SweepResult,
    Trajectory,
    bloch_rhs,
    bloch_rhs_raw,
    fixed_point_state,
    integrate,
    jacobian,
    jacobian_raw,
    sweep_adiabatic,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "BranchNotPresentError",
    "BlochState",
    "HysteresisScan",
    "IntegrationError",
    "MechanismError",
    "MediumParams",
    "Mechanism",
    "NoPhysicalRootError",
    "NonAdiabaticWarning",
    "ScanPoint",
    "SingularFeedbackError",
    "SingularMatrixError",
    "SpectrumCoefficients",
    "SpectrumResult",
    "StationaryState",
    "SteadyStateSolution",
    "SweepResult",
    "Trajectory",
    "bloch_rhs",
    "bloch_rhs_raw",
    "branch_solution",
    "classify_stability",
    "coherence",
    "cubic_coefficients",
    "default_nu_grid",
    "effective_params",
    "find_thresholds",
    "fixed_point_state",
    "free_atom_saturation_max",
    "incoherent_spectrum",
    "integrate",
    "jacobian",
    "jacobian_raw",
    "oracle_spectrum",
    "peak_positions",
    "rabi_relation_sq",
    "scan_hysteresis",
    "solutions_at",
    "solve_inversion",
    "spectrum_coefficients",
    "spectrum_for_branch",
    "spectrum_for_solution",
    "stationary_state",
    "sum_rule_ratio",
    "sweep_adiabatic",
    "validate_mechanism",
    "zeta_total",
]
