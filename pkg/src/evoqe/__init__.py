"""VQE workbench for Heisenberg spin lattices with a quasi-dynamical
evolution heuristic."""

from .ansatz import (
    Ansatz,
    Circuit,
    lower_generator,
    lower_to_circuit,
    mean_field_ansatz,
    parse_ansatz_spec,
    reduced_xy_ansatz,
    xy_ansatz,
)
from .errors import (
    CapacityError,
    NonBipartiteError,
    NumericalError,
    UndefinedFidelityError,
)
from .evolution import (
    CycleRecord,
    EvolutionConfig,
    EvolutionResult,
    energy_fidelity,
    run_evolution,
    run_vqe,
)
from .exact import (
    SpectrumResult,
    dense_ground_energy,
    lanczos_ground_energy,
    mean_field_exact,
)
from .hamiltonians import (
    Hamiltonian,
    Lattice,
    MeasurementGroup,
    Problem,
    alternating_bits,
    build_heisenberg,
    build_lattice,
    build_mean_field,
    build_random_hamiltonian,
    group_terms,
    neel_bits,
    neel_state,
    parse_problem,
)
from .optimize import (
    EnergyObjective,
    OptimizerConfig,
    OptimizerResult,
    minimize,
    parameter_shift_gradient,
)
from .runtime import (
    ION_TRAP,
    SUPERCONDUCTING,
    DeviceProfile,
    RuntimeEstimate,
    build_runtime_estimate,
    estimate_energy_eval_time,
    estimate_total_time,
    sequential_gate_depth,
)
from .sampling import SampledEstimate, count_unique_bitstrings, estimate_energy_sampled
from .states import (
    Gate,
    PauliString,
    StateVector,
    apply_circuit,
    apply_gate,
    apply_pauli_exponential,
    expectation,
    init_basis_state,
    sample_bitstrings,
)

__version__ = "0.1.0"
