"""Clamped beam with tip payload under passive nonlinear dynamic feedback.

Simulation and verification toolkit: certified feedback laws, a structure
preserving Hermite discretization, an energy-consistent implicit midpoint
integrator, and operator/trajectory diagnostics.
"""

from .analysis import (
    DecayReport,
    SpectrumReport,
    assemble_linear_matrix,
    beam_frequencies,
    clamped_free_wavenumbers,
    decay_metrics,
    projected_system,
    skew_check,
    spectrum,
)
from .assumptions import CertReport, CheckResult, certify_block, certify_spring_damper
from .beam_model import (
    BeamParams,
    BlockLinearization,
    ClosedLoopConfig,
    PassiveBlock,
    ScalarLaw,
    SpringDamperLaw,
    linearize_block,
    linearize_spring_damper,
    make_block,
    make_law,
    make_spring_damper,
)
from .discretization import (
    DiscreteSystem,
    Mesh,
    assemble,
    assemble_gram,
    build_mesh,
    export_matrix,
    interpolate,
)
from .dynamics import (
    ENERGY_INCREASE_ETA,
    EnergyBreakdown,
    StateVector,
    Tangent,
    apply_generator,
    apply_linear_part,
    apply_nonlinear_part,
    eval_H,
    eval_Hdot,
    pair_with_state,
    state_qnorm2,
    tangent_qnorm,
    zero_state,
)
from .integrator import (
    IntegratorSettings,
    Trajectory,
    first_mode_initial_state,
    simulate,
    smooth_initial_state,
    step_midpoint,
    tangent_residual,
)

__all__ = [
    "BeamParams",
    "BlockLinearization",
    "CertReport",
    "CheckResult",
    "ClosedLoopConfig",
    "DecayReport",
    "DiscreteSystem",
    "ENERGY_INCREASE_ETA",
    "EnergyBreakdown",
    "IntegratorSettings",
    "Mesh",
    "PassiveBlock",
    "ScalarLaw",
    "SpectrumReport",
    "SpringDamperLaw",
    "StateVector",
    "Tangent",
    "Trajectory",
    "apply_generator",
    "apply_linear_part",
    "apply_nonlinear_part",
    "assemble",
    "assemble_gram",
    "assemble_linear_matrix",
    "beam_frequencies",
    "build_mesh",
    "certify_block",
    "certify_spring_damper",
    "clamped_free_wavenumbers",
    "decay_metrics",
    "eval_H",
    "eval_Hdot",
    "export_matrix",
    "first_mode_initial_state",
    "interpolate",
    "linearize_block",
    "linearize_spring_damper",
    "make_block",
    "make_law",
    "make_spring_damper",
    "pair_with_state",
    "projected_system",
    "simulate",
    "smooth_initial_state",
    "skew_check",
    "spectrum",
    "state_qnorm2",
    "step_midpoint",
    "tangent_qnorm",
    "tangent_residual",
    "zero_state",
]

__version__ = "0.1.0"
