"""Numerical verification of the entangled-coordinate two-body Schrodinger equation."""
from .core_model import (
    EPS_NODE,
    NATURAL,
    ComplexField,
    ConvergenceError,
    DomainError,
    EntangleError,
    EvaluationError,
    Grid,
    NodeMask,
    QuantumNumbers,
    ReferenceState,
    ResidualReport,
    SeparableField,
    SingularityError,
    StateSpec,
    SystemParams,
    com_join,
    com_split,
    make_grid,
    make_system,
)
from .oscillator import eigenstate, energy_of, ground_state, hermite, wavefunction
from .entangle_map import (
    consistency_ratio,
    from_entangled,
    tau,
    to_conjugate,
    to_entangled,
)
from .diffcalc import d_dz, d_dz_conj, ladder_apply, mixed_second, number_operator_check
from .residuals import (
    PotentialSpec,
    SuiteConfig,
    residual_com,
    residual_entangled,
    residual_reference,
    residual_relative,
    residual_time,
    run_suite,
)
from .spectral_oracle import EigenPair, make_reference_from_numeric, separable_compose, solve_1d

__version__ = "0.1.0"
