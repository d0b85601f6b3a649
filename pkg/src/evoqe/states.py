"""Dense state-vector engine.

Conventions (fixed for the whole package):
- qubit 0 is the least-significant bit of the basis-state index;
- bitstrings are written qubit-0-first, i.e. ``bits[q]`` is the value of
  qubit ``q``;
- Rz(theta) = exp(-i*theta*Z/2) and every Pauli exponential uses the same
  half-angle convention exp(-i*(theta/2)*P).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError

#: Largest state vector we allocate (2^30 amplitudes = 16 GiB); anything
#: beyond that is rejected up front instead of dying in the allocator.
MAX_QUBITS = 30

_SQRT2_INV = 1.0 / np.sqrt(2.0)

_GATE_1Q = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
}

_INVERSE_KIND = {"X": "X", "H": "H", "S": "Sdg", "Sdg": "S", "CNOT": "CNOT", "SWAP": "SWAP"}


@dataclass
class Gate:
    """A gate from the fixed set {X, H, S, Sdg, Rz, CNOT, SWAP}.

    ``targets`` is (qubit,) for single-qubit kinds, (control, target) for
    CNOT and (a, b) for SWAP.  ``angle`` is only meaningful for Rz.
    """

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in ("X", "H", "S", "Sdg", "Rz", "CNOT", "SWAP"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        self.targets = tuple(int(q) for q in self.targets)
        n_expected = 2 if self.kind in ("CNOT", "SWAP") else 1
        if len(self.targets) != n_expected:
            raise ValueError(f"{self.kind} takes {n_expected} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"gate targets must be distinct, got {self.targets}")
        if self.kind == "Rz" and self.angle is None:
            raise ValueError("Rz requires an angle")

    def inverse(self) -> "Gate":
        if self.kind == "Rz":
            return Gate("Rz", self.targets, -self.angle)
        return Gate(_INVERSE_KIND[self.kind], self.targets)

    def n_targets(self) -> int:
        return len(self.targets)


@dataclass
class PauliString:
    """A weighted Pauli string: coefficient * prod_q sigma_q^{factors[q]}.

    ``factors`` maps qubit index -> one of 'X', 'Y', 'Z'; identity elsewhere.
    """

    factors: dict[int, str]
    coefficient: float = 1.0

    def __post_init__(self):
        for q, p in self.factors.items():
            if p not in ("X", "Y", "Z"):
                raise ValueError(f"invalid Pauli letter {p!r} on qubit {q}")
            if q < 0:
                raise ValueError(f"negative qubit index {q}")

    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.factors))

    def key(self) -> tuple[tuple[int, str], ...]:
        """Hashable identity of the operator part (coefficient excluded)."""
        return tuple(sorted(self.factors.items()))


@dataclass
class StateVector:
    """Dense complex amplitudes over the 2^n computational basis states."""

    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.amplitudes) != 1 << self.n_qubits:
            raise ValueError("amplitude array length must be 2^n_qubits")
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


# ---------------------------------------------------------------------------
# Basis states and bitstrings

def bits_to_index(bits: str) -> int:
    """Index of the basis state written qubit-0-first."""
    index = 0
    for q, b in enumerate(bits):
        if b not in "01":
            raise ValueError(f"bitstring may contain only 0/1, got {bits!r}")
        index |= (b == "1") << q
    return index


def index_to_bits(index: int, n_qubits: int) -> str:
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n_qubits))


def init_basis_state(n_qubits: int, bits: str) -> StateVector:
    """Prepare |bits> with amplitude 1 on the indexed basis state."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if n_qubits > MAX_QUBITS:
        raise CapacityError(
            f"{n_qubits} qubits exceed the {MAX_QUBITS}-qubit state-vector budget"
        )
    if len(bits) != n_qubits:
        raise ValueError(f"bitstring length {len(bits)} != n_qubits {n_qubits}")
    amplitudes = np.zeros(1 << n_qubits, dtype=np.complex128)
    amplitudes[bits_to_index(bits)] = 1.0
    return StateVector(n_qubits, amplitudes)


# ---------------------------------------------------------------------------
# Gate application

_ARANGE_CACHE: dict[int, np.ndarray] = {}


def _indices(n_qubits: int) -> np.ndarray:
    arange = _ARANGE_CACHE.get(n_qubits)
    if arange is None:
        arange = np.arange(1 << n_qubits, dtype=np.int64)
        _ARANGE_CACHE[n_qubits] = arange
    return arange


def _check_targets(state: StateVector, gate: Gate) -> None:
    for q in gate.targets:
        if not 0 <= q < state.n_qubits:
            raise ValueError(
                f"gate target {q} out of range for {state.n_qubits} qubits"
            )


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Return the state transformed by the gate's unitary (input untouched)."""
    _check_targets(state, gate)
    n = state.n_qubits
    psi = state.amplitudes

    if gate.kind == "Rz":
        q = gate.targets[0]
        half = 0.5 * gate.angle
        bit = (_indices(n) >> q) & 1
        phase = np.where(bit == 1, np.exp(1j * half), np.exp(-1j * half))
        return StateVector(n, psi * phase)

    if gate.kind in _GATE_1Q:
        q = gate.targets[0]
        m = _GATE_1Q[gate.kind]
        # Reshape so the target qubit is the middle axis.
        a = psi.reshape(1 << (n - 1 - q), 2, 1 << q)
        out = np.empty_like(a)
        out[:, 0, :] = m[0, 0] * a[:, 0, :] + m[0, 1] * a[:, 1, :]
        out[:, 1, :] = m[1, 0] * a[:, 0, :] + m[1, 1] * a[:, 1, :]
        return StateVector(n, out.reshape(-1))

    idx = _indices(n)
    if gate.kind == "CNOT":
        control, target = gate.targets
        out = psi.copy()
        sel = idx[(idx >> control) & 1 == 1]
        out[sel] = psi[sel ^ (1 << target)]
        return StateVector(n, out)

    # SWAP
    a, b = gate.targets
    out = psi.copy()
    sel = idx[((idx >> a) & 1) != ((idx >> b) & 1)]
    out[sel] = psi[sel ^ ((1 << a) | (1 << b))]
    return StateVector(n, out)


def apply_circuit(state: StateVector, gates) -> StateVector:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


# ---------------------------------------------------------------------------
# Pauli-string action and expectation values

_SIGN_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _parity_signs(n_qubits: int, mask: int) -> np.ndarray:
    """(-1)^popcount(index & mask) for every basis index, cached."""
    signs = _SIGN_CACHE.get((n_qubits, mask))
    if signs is None:
        parity = np.bitwise_count(_indices(n_qubits) & mask).astype(np.int8) & 1
        signs = (1 - 2 * parity).astype(np.float64)
        _SIGN_CACHE[(n_qubits, mask)] = signs
    return signs


def _masks(term: PauliString) -> tuple[int, int, int]:
    """(flip mask, Y|Z sign mask, number of Y factors)."""
    flip = sign = n_y = 0
    for q, p in term.factors.items():
        if p in ("X", "Y"):
            flip |= 1 << q
        if p in ("Y", "Z"):
            sign |= 1 << q
        if p == "Y":
            n_y += 1
    return flip, sign, n_y


def pauli_apply(state: StateVector, term: PauliString) -> np.ndarray:
    """Amplitudes of coefficient * P |state>.

    Uses (P psi)[j] = (-i)^{#Y} * (-1)^popcount(j & maskYZ) * psi[j ^ flip],
    which follows from X|b>=|1-b>, Y|b>=i(-1)^b|1-b>, Z|b>=(-1)^b|b>.
    """
    n = state.n_qubits
    for q in term.factors:
        if q >= n:
            raise ValueError(f"Pauli factor on qubit {q} out of range for {n} qubits")
    flip, sign_mask, n_y = _masks(term)
    prefactor = term.coefficient * (-1j) ** n_y
    psi = state.amplitudes
    if flip:
        psi = psi[_indices(n) ^ flip]
    if sign_mask:
        psi = psi * _parity_signs(n, sign_mask)
    return prefactor * psi


def expectation(state: StateVector, term: PauliString) -> float:
    """coefficient * <psi| P |psi>, guaranteed real for Hermitian strings."""
    value = np.vdot(state.amplitudes, pauli_apply(state, term))
    return float(value.real)


def apply_pauli_exponential(state: StateVector, term: PauliString, theta: float) -> StateVector:
    """exp(-i*(theta/2)*P) |state> for a coefficient-1 Pauli string.

    Exact for Pauli strings since P^2 = 1:
    exp(-i(theta/2)P) = cos(theta/2) - i sin(theta/2) P.
    """
    unit = PauliString(term.factors, 1.0)
    amplitudes = (
        np.cos(0.5 * theta) * state.amplitudes
        - 1j * np.sin(0.5 * theta) * pauli_apply(state, unit)
    )
    return StateVector(state.n_qubits, amplitudes)


# ---------------------------------------------------------------------------
# Measurement sampling

def sample_indices(state: StateVector, shots: int, seed: int) -> np.ndarray:
    """Basis-state indices of `shots` measurement outcomes, in shot order.

    The Philox generator is counter-based and one uniform is drawn per shot,
    so the output is reproducible independent of chunking.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probabilities = state.probabilities()
    cdf = np.cumsum(probabilities)
    cdf[-1] = 1.0  # guard against rounding just below 1
    rng = np.random.Generator(np.random.Philox(seed))
    draws = rng.random(shots)
    return np.searchsorted(cdf, draws, side="right")


def sample_bitstrings(state: StateVector, shots: int, seed: int) -> dict[str, int]:
    """Multiset of measured bitstrings; counts sum to `shots`."""
    outcomes = sample_indices(state, shots, seed)
    values, counts = np.unique(outcomes, return_counts=True)
    return {
        index_to_bits(int(v), state.n_qubits): int(c)
        for v, c in zip(values, counts)
    }
