"""Chebyshev extrapolation of Trotterized quantum-simulation data to zero step size."""

from .chebgrid import ChebyshevGrid, InterpolationFit, fit, lebesgue_factor, make_grid, propagate_variance, weights_at_zero
from .errors import (
    BranchCutError,
    CapabilityError,
    ChebtrotError,
    DomainError,
    InputError,
    LevelCrossingError,
    WindowError,
)
from .estimators import (
    CostLedger,
    ExactData,
    ExtrapolationResult,
    GaussianNoise,
    GqpeEstimator,
    ShotNoise,
    cost_ledger,
    cost_scan,
    crossover_epsilon,
    estimate_trotter_error,
    extrapolate_expectation,
    extrapolate_ground_energy,
    frobenius_circuit_probability,
    frobenius_distance,
    frobenius_probability,
)
from .operators import HamiltonianModel, HermitianTerm, build_pauli_term, build_tfim, eig_herm, sum_matrix
from .phase_est import (
    GaussianWindowSpec,
    PhaseDistribution,
    allocate_node_variances,
    gqpe_distribution,
    make_window,
    measured_window_error,
    sample_phases,
    upsample,
    window_error_budget,
)
from .trotter import TrotterScheme, apply_scheme, effective_hamiltonian, evolve_fractional, integer_step_count, st_scheme

__version__ = "0.1.0"
