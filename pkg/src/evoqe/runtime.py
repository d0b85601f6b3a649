"""Projected wall-clock time on a gate-based device.

The per-evaluation time is the critical-path gate time multiplied by the
number of simultaneously measurable groups and the shot count; totals are
that times the number of energy evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ansatz import Circuit

SECONDS_PER_DAY = 86400.0


@dataclass
class DeviceProfile:
    t_1q: float  # seconds per single-qubit gate
    t_2q: float  # seconds per two-qubit gate

    def __post_init__(self):
        if self.t_1q <= 0 or self.t_2q <= 0:
            raise ValueError("gate times must be strictly positive")


# Superconducting-transmon figures; the ion-trap preset differs only in the
# (much slower) two-qubit gate time.
SUPERCONDUCTING = DeviceProfile(t_1q=85e-9, t_2q=400e-9)
ION_TRAP = DeviceProfile(t_1q=85e-9, t_2q=1.6e-6)

PROFILES = {"superconducting": SUPERCONDUCTING, "ion-trap": ION_TRAP}


@dataclass
class RuntimeEstimate:
    n_1q_sequential: int
    n_2q_sequential: int
    groups: int
    shots: int
    seconds_per_evaluation: float
    n_evaluations: int
    total_seconds: float

    @property
    def total_days(self) -> float:
        return self.total_seconds / SECONDS_PER_DAY


def sequential_gate_depth(circuit: Circuit) -> tuple[int, int]:
    """(single-qubit, two-qubit) gate counts along the critical path.

    Gates on disjoint qubits may run in parallel; a gate waits for the
    deepest qubit it touches.  Ties between equally long paths prefer the
    one with more two-qubit gates (the slower one).
    """
    depth: dict[int, tuple[int, int]] = {}
    for gate in circuit.gates:
        best = (0, 0)
        for qubit in gate.targets:
            d = depth.get(qubit, (0, 0))
            if (d[0] + d[1], d[1]) > (best[0] + best[1], best[1]):
                best = d
        if gate.n_targets() == 2:
            best = (best[0], best[1] + 1)
        else:
            best = (best[0] + 1, best[1])
        for qubit in gate.targets:
            depth[qubit] = best
    if not depth:
        return (0, 0)
    critical = max(depth.values(), key=lambda d: (d[0] + d[1], d[1]))
    return critical


def estimate_energy_eval_time(
    n_1q: int, n_2q: int, profile: DeviceProfile, groups: int, shots: int
) -> float:
    """Seconds for one energy evaluation: gate time x groups x shots."""
    if groups < 1 or shots < 1 or n_1q < 0 or n_2q < 0:
        raise ValueError("groups/shots must be >= 1 and gate counts >= 0")
    return (n_1q * profile.t_1q + n_2q * profile.t_2q) * groups * shots


def estimate_total_time(seconds_per_evaluation: float, n_evaluations: int) -> tuple[float, float]:
    """(total seconds, total days) for the full optimization."""
    if seconds_per_evaluation < 0 or n_evaluations < 1:
        raise ValueError("need non-negative eval time and >= 1 evaluations")
    total = seconds_per_evaluation * n_evaluations
    return total, total / SECONDS_PER_DAY


def build_runtime_estimate(
    n_1q: int,
    n_2q: int,
    profile: DeviceProfile,
    groups: int,
    shots: int,
    n_evaluations: int,
) -> RuntimeEstimate:
    per_eval = estimate_energy_eval_time(n_1q, n_2q, profile, groups, shots)
    total, _ = estimate_total_time(per_eval, n_evaluations)
    return RuntimeEstimate(
        n_1q_sequential=n_1q,
        n_2q_sequential=n_2q,
        groups=groups,
        shots=shots,
        seconds_per_evaluation=per_eval,
        n_evaluations=n_evaluations,
        total_seconds=total,
    )
