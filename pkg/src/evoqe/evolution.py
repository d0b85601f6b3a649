"""Quasi-dynamical evolution: chained VQE runs with frozen states and zeroed
parameters.

Cycle 0 is the plain VQE run; each later cycle restarts the optimizer at
all-zero parameters from the previous cycle's optimized state, so the
cycle-start energy exactly reproduces the previous cycle-end energy and the
cycle energies are non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ansatz import Ansatz
from .errors import UndefinedFidelityError
from .hamiltonians import Hamiltonian
from .optimize import EnergyObjective, OptimizerConfig, OptimizerResult, minimize
from .states import StateVector


@dataclass
class CycleRecord:
    cycle: int
    params: np.ndarray = field(repr=False)
    start_energy: float
    end_energy: float
    n_evaluations: int
    state: StateVector = field(repr=False)
    n_iterations: int = 0
    converged: bool = False
    trajectory: list[tuple[int, float]] = field(default_factory=list, repr=False)


@dataclass
class EvolutionConfig:
    max_cycles: int = 3  # evolution cycles after the plain VQE run
    stall_threshold: float = 1e-4
    mode: str = "frozen-state"  # "frozen-state" | "deep-circuit"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.max_cycles < 1:
            raise ValueError("max_cycles must be >= 1")
        if self.stall_threshold <= 0:
            raise ValueError("stall threshold must be > 0")
        if self.mode not in ("frozen-state", "deep-circuit"):
            raise ValueError(f"unknown evolution mode {self.mode!r}")


@dataclass
class EvolutionResult:
    cycles: list[CycleRecord]

    @property
    def final_energy(self) -> float:
        return self.cycles[-1].end_energy

    @property
    def final_state(self) -> StateVector:
        return self.cycles[-1].state

    @property
    def total_evaluations(self) -> int:
        return sum(c.n_evaluations for c in self.cycles)


def energy_fidelity(energy: float, reference: float) -> float:
    """energy / reference; both negative in practice, so the ratio is in (0, 1]."""
    if reference == 0:
        raise UndefinedFidelityError("reference energy is zero")
    return energy / reference


class _DeepCircuitAnsatz(Ansatz):
    """Re-executes all frozen layers before the active one on every evaluation.

    Energies match frozen-state mode exactly (same unitary product); only
    the work per evaluation differs, which is what the runtime model cares
    about.
    """

    def __init__(self, ansatz: Ansatz, frozen_layers: list[np.ndarray]):
        super().__init__(ansatz.n_qubits, ansatz.generators, ansatz.param_indices, ansatz.name)
        self._frozen_layers = frozen_layers
        self._layer_ansatz = ansatz

    def apply(self, state: StateVector, params: np.ndarray) -> StateVector:
        for layer_params in self._frozen_layers:
            state = self._layer_ansatz.apply(state, layer_params)
        return self._layer_ansatz.apply(state, params)


def run_vqe(
    hamiltonian: Hamiltonian,
    ansatz: Ansatz,
    initial_state: StateVector,
    init_params,
    optimizer_config: OptimizerConfig | None = None,
    cycle: int = 0,
) -> CycleRecord:
    """One optimizer run; the frozen state is the ansatz at the best
    parameters applied to the initial state."""
    init_params = np.asarray(init_params, dtype=float)
    objective = EnergyObjective(hamiltonian, ansatz, initial_state)
    start_energy = hamiltonian.energy(ansatz.apply(initial_state.copy(), init_params))
    result: OptimizerResult = minimize(objective, init_params, optimizer_config)
    frozen = ansatz.apply(initial_state.copy(), result.params)
    return CycleRecord(
        cycle=cycle,
        params=result.params,
        start_energy=start_energy,
        end_energy=result.energy,
        n_evaluations=result.n_evaluations,
        state=frozen,
        n_iterations=result.n_iterations,
        converged=result.converged,
        trajectory=result.trajectory,
    )


def run_evolution(
    hamiltonian: Hamiltonian,
    ansatz: Ansatz,
    initial_state: StateVector,
    config: EvolutionConfig | None = None,
    init_params=None,
) -> EvolutionResult:
    """Plain VQE followed by up to ``max_cycles`` evolution cycles.

    ``init_params`` seeds cycle 0 only (defaults to zeros); every later
    cycle starts at zeros, which leaves the frozen state untouched.  Stops
    early once consecutive cycle-end energies differ by less than the stall
    threshold.
    """
    config = config or EvolutionConfig()
    if init_params is None:
        init_params = np.zeros(ansatz.n_params)

    cycles = []
    frozen_layers: list[np.ndarray] = []

    first = run_vqe(hamiltonian, ansatz, initial_state, init_params, config.optimizer, cycle=0)
    cycles.append(first)
    frozen_layers.append(first.params)

    for p in range(1, config.max_cycles + 1):
        zeros = np.zeros(ansatz.n_params)
        if config.mode == "frozen-state":
            record = run_vqe(
                hamiltonian, ansatz, cycles[-1].state, zeros, config.optimizer, cycle=p
            )
        else:
            deep = _DeepCircuitAnsatz(ansatz, list(frozen_layers))
            record = run_vqe(
                hamiltonian, deep, initial_state, zeros, config.optimizer, cycle=p
            )
        cycles.append(record)
        frozen_layers.append(record.params)
        if abs(record.end_energy - cycles[-2].end_energy) < config.stall_threshold:
            break
    return EvolutionResult(cycles)
