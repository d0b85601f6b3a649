"""Parametrized ansatzes and their lowering to elementary gates.

The XY ansatz places a Y/X pair (plus a Z on the hub qubit for non-hub
pairs) on every ordered qubit pair, two factor groups of N*(N-1)/2
generators each.  The mean-field ansatz is one X-Y exponential per disjoint
qubit pair, constant depth in N.  All generators use the half-angle
convention exp(-i*(theta/2)*P).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import (
    Gate,
    PauliString,
    StateVector,
    _indices,
    _masks,
    _parity_signs,
    apply_circuit,
)


@dataclass
class Ansatz:
    """Ordered generators; ``generators[i]`` consumes parameter ``param_indices[i]``."""

    n_qubits: int
    generators: list[PauliString]
    param_indices: list[int]
    name: str = ""

    @property
    def n_params(self) -> int:
        return 0 if not self.param_indices else max(self.param_indices) + 1

    def _tables(self):
        # (flip mask, sign mask, (-i)^{#Y}) per generator, built once.
        tables = getattr(self, "_action_tables", None)
        if tables is None:
            tables = []
            for generator in self.generators:
                flip, sign_mask, n_y = _masks(generator)
                tables.append((flip, sign_mask, (-1j) ** n_y))
            self._action_tables = tables
        return tables

    def apply(self, state: StateVector, params: np.ndarray) -> StateVector:
        """Fast emulator path: apply each generator exponential analytically.

        exp(-i(theta/2)P) = cos(theta/2) - i sin(theta/2) P is exact for
        Pauli strings, so this produces the same unitary as executing the
        lowered circuit, at a fraction of the gate count.
        """
        params = _check_params(self, params)
        n = self.n_qubits
        idx = _indices(n)
        psi = state.amplitudes.copy()
        half = 0.5 * params
        cosines, sines = np.cos(half), np.sin(half)
        for (flip, sign_mask, prefactor), slot in zip(self._tables(), self.param_indices):
            factor = -1j * sines[slot] * prefactor
            if factor == 0:
                continue
            piece = psi[idx ^ flip] if flip else psi
            if sign_mask:
                piece = piece * _parity_signs(n, sign_mask)
            psi = cosines[slot] * psi + factor * piece
        return StateVector(n, psi)


@dataclass
class Circuit:
    """Lowered gate sequence with the Rz positions of every parameter slot."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    param_slots: dict[int, list[int]] = field(default_factory=dict)

    def apply(self, state: StateVector) -> StateVector:
        return apply_circuit(state, self.gates)


def _check_params(ansatz: Ansatz, params) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.shape != (ansatz.n_params,):
        raise ValueError(
            f"expected {ansatz.n_params} parameters, got shape {params.shape}"
        )
    return params


# ---------------------------------------------------------------------------
# Ansatz constructors

def _xy_pairs(n_qubits: int):
    """(low, high) pairs in application order: low ascending, high ascending."""
    return [
        (low, high)
        for low in range(n_qubits - 1)
        for high in range(low + 1, n_qubits)
    ]


def _xy_generator(y_qubit: int, x_qubit: int, hub: int) -> PauliString:
    factors = {y_qubit: "Y", x_qubit: "X"}
    if hub not in (y_qubit, x_qubit):
        factors[hub] = "Z"
    return PauliString(factors, 1.0)


def xy_ansatz(n_qubits: int) -> Ansatz:
    """The N*(N-1)-parameter two-group ansatz with all-to-one hub connectivity.

    Group 1 (applied first) has the Y factor on the lower qubit of each pair,
    group 2 on the higher; pairs touching the hub qubit (index N-1) drop the
    hub Z factor.
    """
    if n_qubits < 2:
        raise ValueError("xy ansatz needs at least 2 qubits")
    hub = n_qubits - 1
    generators = []
    for low, high in _xy_pairs(n_qubits):
        generators.append(_xy_generator(low, high, hub))
    for low, high in _xy_pairs(n_qubits):
        generators.append(_xy_generator(high, low, hub))
    return Ansatz(n_qubits, generators, list(range(len(generators))), "xy")


def reduced_xy_ansatz(n_qubits: int, rule: str, band_width: int = 10) -> Ansatz:
    """Parameter-reduced variants of the XY ansatz (first group only).

    rule "half":  all first-group pairs, M = N(N-1)/2.
    rule "band":  first-group pairs with high - low <= band_width.
    rule "chain": first-group pairs with high = low + 1, M = N-1.
    """
    if n_qubits < 2:
        raise ValueError("xy ansatz needs at least 2 qubits")
    if rule == "half":
        keep = lambda low, high: True
    elif rule == "band":
        keep = lambda low, high: high - low <= band_width
    elif rule == "chain":
        keep = lambda low, high: high == low + 1
    else:
        raise ValueError(f"unknown reduction rule {rule!r}")
    hub = n_qubits - 1
    generators = [
        _xy_generator(low, high, hub)
        for low, high in _xy_pairs(n_qubits)
        if keep(low, high)
    ]
    name = f"xy-{rule}" if rule != "band" else f"xy-band:{band_width}"
    return Ansatz(n_qubits, generators, list(range(len(generators))), name)


def mean_field_ansatz(n_qubits: int) -> Ansatz:
    """floor(N/2) disjoint Y-X pair exponentials; the last qubit idles for odd N.

    The Y factor sits on the even-indexed qubit of each pair; with the
    half-angle convention this makes all parameters pi/2 turn the
    |...0101> start state into a product of pair singlets.
    """
    if n_qubits < 2:
        raise ValueError("mean-field ansatz needs at least 2 qubits")
    generators = [
        PauliString({2 * k: "Y", 2 * k + 1: "X"}, 1.0)
        for k in range(n_qubits // 2)
    ]
    return Ansatz(n_qubits, generators, list(range(len(generators))), "meanfield")


# ---------------------------------------------------------------------------
# Lowering to gates

def _basis_change(qubit: int, letter: str) -> tuple[list[Gate], list[Gate]]:
    """Pre/post rotations taking the Pauli letter to Z on this qubit."""
    if letter == "X":
        return [Gate("H", (qubit,))], [Gate("H", (qubit,))]
    if letter == "Y":
        # exp(-i t Y/2) = S H exp(-i t Z/2) H Sdg
        return (
            [Gate("Sdg", (qubit,)), Gate("H", (qubit,))],
            [Gate("H", (qubit,)), Gate("S", (qubit,))],
        )
    return [], []


def lower_generator(generator: PauliString, theta: float) -> list[Gate]:
    """Gate sequence for exp(-i*(theta/2)*P).

    Basis changes bring every factor to Z, a CNOT ladder accumulates the
    parity onto the largest-index participating qubit, which carries the
    single Rz, and everything is mirrored back.
    """
    support = generator.support()
    target = support[-1]
    pre: list[Gate] = []
    post: list[Gate] = []
    for qubit in support:
        before, after = _basis_change(qubit, generator.factors[qubit])
        pre.extend(before)
        post = after + post
    ladder = [
        Gate("CNOT", (support[k], support[k + 1]))
        for k in range(len(support) - 1)
    ]
    return pre + ladder + [Gate("Rz", (target,), theta)] + ladder[::-1] + post


def lower_to_circuit(ansatz: Ansatz, params) -> Circuit:
    """Lower the full ansatz at the given parameter values.

    Zero-angle slots still emit their gates (the circuit shape is a
    deterministic function of the ansatz alone).
    """
    params = _check_params(ansatz, params)
    circuit = Circuit(ansatz.n_qubits)
    for generator, slot in zip(ansatz.generators, ansatz.param_indices):
        gates = lower_generator(generator, float(params[slot]))
        base = len(circuit.gates)
        rz_positions = [
            base + offset for offset, g in enumerate(gates) if g.kind == "Rz"
        ]
        circuit.param_slots.setdefault(slot, []).extend(rz_positions)
        circuit.gates.extend(gates)
    return circuit


# ---------------------------------------------------------------------------
# Spec strings

def parse_ansatz_spec(spec: str, n_qubits: int) -> Ansatz:
    """Build an ansatz from a CLI spec string.

    Accepted: "xy", "xy-half", "xy-band:<w>", "xy-chain", "meanfield".
    """
    if spec == "xy":
        return xy_ansatz(n_qubits)
    if spec == "xy-half":
        return reduced_xy_ansatz(n_qubits, "half")
    if spec == "xy-chain":
        return reduced_xy_ansatz(n_qubits, "chain")
    if spec.startswith("xy-band:"):
        width = int(spec.split(":", 1)[1])
        if width < 1:
            raise ValueError(f"band width must be >= 1, got {width}")
        return reduced_xy_ansatz(n_qubits, "band", band_width=width)
    if spec == "meanfield":
        return mean_field_ansatz(n_qubits)
    raise ValueError(f"unknown ansatz spec {spec!r}")
