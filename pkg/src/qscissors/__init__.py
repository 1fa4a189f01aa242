"""Nonlinear quantum scissors simulator.

Two Kerr-nonlinear oscillators coupled by two-photon exchange, one of them
coherently driven, each relaxing into its own broadband squeezed reservoir.
The package propagates the density matrix with a classical RK4 integrator,
projects snapshots onto the qutrit (x) qubit scissors subspace, tracks the
negativity of the partial transpose, and detects entanglement sudden death
and rebirths, including parameter sweeps over the reservoir squeezing phase
and strength.
"""

from .fock import (
    ModeDims,
    annihilator,
    basis_index,
    basis_state,
    creator,
    expectation,
    pure_density,
    unindex,
    vacuum_state,
)
from .model import (
    DissipationChannel,
    ModelOperators,
    SystemParams,
    build_hamiltonian,
    build_model,
    single_mode_model,
    squeezing_coefficient,
)
from .dynamics import (
    DivergenceError,
    EvolutionRecord,
    IntegrationError,
    IntegratorOptions,
    PureEvolutionRecord,
    StabilityError,
    default_step,
    evolve_master,
    evolve_pure,
    expm_oracle,
    liouvillian,
    master_rhs,
    stability_rate,
)
from .entanglement import (
    NegativitySeries,
    bell_state,
    jacobi_eigenvalues,
    negativity,
    partial_transpose_qubit,
    truncate_qutrit_qubit,
    truncation_fidelity,
)
from .analysis import (
    ConvergenceReport,
    DeathReport,
    SweepRow,
    SweepTable,
    cutoff_convergence,
    detect_death_time,
    find_negativity_maxima,
    run_decay,
    run_fidelity,
    sweep_phase,
    sweep_squeezing,
)

__version__ = "0.1.0"
