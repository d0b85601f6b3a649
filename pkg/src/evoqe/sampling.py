"""Finite-shot energy estimation through measurement groups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import Hamiltonian, MeasurementGroup, group_terms
from .states import Gate, StateVector, apply_gate, sample_indices


@dataclass
class SampledEstimate:
    energy: float
    shots_per_group: int
    n_groups: int
    unique_per_group: list[int]
    standard_error: float
    split_total: bool = False

    @property
    def total_shots(self) -> int:
        return self.shots_per_group * self.n_groups


def _rotate_to_measurement_basis(state: StateVector, group: MeasurementGroup) -> StateVector:
    """Map each qubit's group basis to Z: X -> H, Y -> (Sdg, H)."""
    for qubit, basis in enumerate(group.basis):
        if basis == "X":
            state = apply_gate(state, Gate("H", (qubit,)))
        elif basis == "Y":
            state = apply_gate(state, Gate("Sdg", (qubit,)))
            state = apply_gate(state, Gate("H", (qubit,)))
    return state


def _group_seeds(seed: int, n_groups: int) -> list[int]:
    """Disjoint per-group substreams derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(n_groups)
    return [int(c.generate_state(1)[0]) for c in children]


def estimate_energy_sampled(
    state: StateVector,
    hamiltonian: Hamiltonian,
    shots_per_group: int,
    seed: int,
    split_total: bool = False,
) -> SampledEstimate:
    """Shot-based estimate of <H> from per-group bit parities.

    Each group is rotated to its measurement basis and sampled; a member
    term's estimate is its coefficient times the mean parity over the bits
    in its support.  ``split_total=True`` divides the shot budget evenly
    over the groups instead of granting it to each group.
    """
    if shots_per_group < 1:
        raise ValueError("shots_per_group must be >= 1")
    groups = group_terms(hamiltonian)
    shots = shots_per_group
    if split_total:
        shots = max(1, shots_per_group // len(groups))

    energy = 0.0
    variance_of_mean = 0.0
    unique_per_group = []
    for group, group_seed in zip(groups, _group_seeds(seed, len(groups))):
        rotated = _rotate_to_measurement_basis(state.copy(), group)
        outcomes = sample_indices(rotated, shots, group_seed)
        unique_per_group.append(int(len(np.unique(outcomes))))
        group_values = np.zeros(shots)
        for index in group.term_indices:
            term = hamiltonian.terms[index]
            mask = 0
            for qubit in term.factors:
                mask |= 1 << qubit
            parities = 1.0 - 2.0 * (np.bitwise_count(outcomes & mask) & 1)
            group_values += term.coefficient * parities
        energy += float(group_values.mean())
        if shots > 1:
            variance_of_mean += float(group_values.var(ddof=1)) / shots

    return SampledEstimate(
        energy=energy,
        shots_per_group=shots,
        n_groups=len(groups),
        unique_per_group=unique_per_group,
        standard_error=float(np.sqrt(variance_of_mean)),
        split_total=split_total,
    )


def count_unique_bitstrings(state: StateVector, shots: int, seed: int) -> int:
    """Distinct computational-basis outcomes among `shots` measurements."""
    return int(len(np.unique(sample_indices(state, shots, seed))))
