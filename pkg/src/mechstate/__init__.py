"""Pulse-shaped position measurements of a mechanical resonator via a qubit.

A qubit whose frequency depends on the resonator position is driven by a
shaped pulse; post-selecting the excited state applies a position-diagonal
measurement operator whose profile is set by the pulse. Chaining such
measurements with free rotations prepares target states from thermal ones.
"""
from .core import (
    DEFAULT_GRID,
    DEFAULT_N_MAX,
    BasisTransform,
    GridFunction,
    GridTooSmallError,
    MeasurementOperator,
    PositionGrid,
    ProtocolResult,
    Pulse,
    QuantumState,
    SystemParams,
    build_basis_transform,
    hermite_functions,
    state_space_grid,
)
from .dynamics import analytic_tophat, propagate_point, realize_operator, tophat_pulse
from .protocol import (
    DEFAULT_SWEEP,
    ProtocolConfig,
    StatePreparation,
    coherence_budget,
    fock_fidelity_curve,
    run_protocol,
    sweep_squeezing,
)
from .states import (
    VanishingProbabilityError,
    apply_measurement,
    measurement_probability,
    momentum_marginal,
    position_marginal,
    purity,
    rotate,
    state_fidelity,
    thermal_state,
    wigner,
)
from .synthesis import (
    PulseSynthesizer,
    SynthesisConfig,
    SynthesisError,
    SynthesisWarning,
    operator_fidelity,
    optimize_chi,
    synthesize_pulse,
)
from .targets import TargetSpec, parse_target, render_target

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GRID",
    "DEFAULT_N_MAX",
    "DEFAULT_SWEEP",
    "BasisTransform",
    "GridFunction",
    "GridTooSmallError",
    "MeasurementOperator",
    "PositionGrid",
    "ProtocolConfig",
    "ProtocolResult",
    "Pulse",
    "PulseSynthesizer",
    "QuantumState",
    "StatePreparation",
    "SynthesisConfig",
    "SynthesisError",
    "SynthesisWarning",
    "SystemParams",
    "TargetSpec",
    "VanishingProbabilityError",
    "analytic_tophat",
    "apply_measurement",
    "build_basis_transform",
    "coherence_budget",
    "fock_fidelity_curve",
    "hermite_functions",
    "measurement_probability",
    "momentum_marginal",
    "operator_fidelity",
    "optimize_chi",
    "parse_target",
    "position_marginal",
    "propagate_point",
    "purity",
    "realize_operator",
    "render_target",
    "rotate",
    "run_protocol",
    "state_fidelity",
    "state_space_grid",
    "sweep_squeezing",
    "synthesize_pulse",
    "thermal_state",
    "tophat_pulse",
    "wigner",
]
