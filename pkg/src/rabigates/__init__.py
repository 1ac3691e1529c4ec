"""Deterministic nonlinear quadrature phase gates from repeated Rabi interactions."""
from .diagnostics import (
    WignerField,
    WignerGrid,
    fidelity,
    fidelity_of_change,
    min_negativity,
    orthogonal_complement,
    orthogonal_purity,
    purity,
    wigner,
    wigner_cut,
)
from .errors import (
    ConfigError,
    DegenerateResidual,
    ExcessLeakage,
    ExcessLeakageWarning,
    NoImprovement,
    NonCommuting,
    NotHermitian,
    StrengthOutOfRange,
)
from .fock import (
    TruncationConfig,
    coherent_state,
    displacement,
    fock_state,
    hermitian_exp,
    ideal_phase_gate,
    ket_to_dm,
    ladder,
    leakage,
    quadratures,
    vacuum,
)
from .qubit import QubitConvention, combined_m1, combined_m2, kraus_extract, pauli, rabi_unitary
from .synthesis import (
    GateSchedule,
    KrausPair,
    RoundParams,
    SynthesisStrategy,
    alt_round,
    apply_channel,
    correction,
    cubic_round,
    optimize_zeta,
    params_for_target,
    quartic_round,
    round_strength,
    run_schedule,
    schedule_for_target,
    success_probability,
)

__version__ = "0.1.0"
