"""Lattices, Heisenberg/mean-field/random Hamiltonians and measurement groups."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import NonBipartiteError
from .states import PauliString, StateVector, expectation, init_basis_state


@dataclass
class Lattice:
    """Hypercubic lattice with row-major site numbering.

    ``bonds`` lists nearest-neighbour site pairs (i, j) with i < j.
    """

    dims: tuple[int, ...]
    boundary: str  # "open" | "periodic"
    bonds: list[tuple[int, int]]

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.dims))


@dataclass
class Hamiltonian:
    n_qubits: int
    terms: list[PauliString]

    def _energy_tables(self):
        """Diagonal weight vector plus off-diagonal weights grouped by flip
        mask; built once, shared by every energy evaluation."""
        from .states import _indices, _masks, _parity_signs

        tables = getattr(self, "_energy_cache", None)
        if tables is not None:
            return tables
        n = self.n_qubits
        dim = 1 << n
        diagonal = np.zeros(dim)
        off_diagonal: dict[int, np.ndarray] = {}
        for term in self.terms:
            flip, sign_mask, n_y = _masks(term)
            weight = term.coefficient * (-1j) ** n_y
            profile = (
                weight * _parity_signs(n, sign_mask) if sign_mask
                else np.full(dim, weight)
            )
            if flip == 0:
                diagonal += profile.real
            else:
                accumulated = off_diagonal.get(flip)
                if accumulated is None:
                    off_diagonal[flip] = np.asarray(profile, dtype=complex)
                else:
                    accumulated += profile
        # Real weights stay real (halves the work for the usual models).
        compact = [
            (flip, w.real if np.all(w.imag == 0) else w)
            for flip, w in off_diagonal.items()
        ]
        self._energy_cache = (diagonal, compact)
        return self._energy_cache

    def energy(self, state: StateVector) -> float:
        from .states import _indices

        if state.n_qubits != self.n_qubits:
            raise ValueError("state and Hamiltonian qubit counts differ")
        diagonal, off_diagonal = self._energy_tables()
        psi = state.amplitudes
        idx = _indices(self.n_qubits)
        value = float(np.dot(np.abs(psi) ** 2, diagonal))
        conj = psi.conj()
        for flip, weight in off_diagonal:
            value += np.dot(conj * weight, psi[idx ^ flip]).real
        return value


@dataclass
class MeasurementGroup:
    """Terms that become diagonal after one layer of per-qubit basis rotations.

    ``basis[q]`` is the measurement basis of qubit q; qubits not constrained
    by any member term default to 'Z'.
    """

    basis: list[str]
    term_indices: list[int] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Lattices

def build_lattice(dims, boundary: str = "open") -> Lattice:
    """Nearest-neighbour bond list on a hypercubic lattice.

    Sites are numbered row-major over ``dims``; periodic boundaries wrap every
    dimension with extent > 2 (a wrap bond on extent 2 would duplicate the
    open bond).
    """
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ValueError("dims must be non-empty")
    if any(d < 1 for d in dims):
        raise ValueError(f"extents must be >= 1, got {dims}")
    if all(d < 2 for d in dims):
        raise ValueError(f"at least one extent must be >= 2, got {dims}")
    if boundary not in ("open", "periodic"):
        raise ValueError(f"boundary must be open|periodic, got {boundary!r}")

    strides = np.zeros(len(dims), dtype=int)
    acc = 1
    for axis in range(len(dims) - 1, -1, -1):
        strides[axis] = acc
        acc *= dims[axis]

    bonds = []
    for coords in itertools.product(*(range(d) for d in dims)):
        site = int(np.dot(coords, strides))
        for axis, extent in enumerate(dims):
            if extent < 2:
                continue
            if coords[axis] + 1 < extent:
                other = site + strides[axis]
            elif boundary == "periodic" and extent > 2:
                other = site - (extent - 1) * strides[axis]
            else:
                continue
            bonds.append((min(site, other), max(site, other)))
    bonds = sorted(set(bonds))
    return Lattice(dims, boundary, bonds)


# ---------------------------------------------------------------------------
# Hamiltonians

def build_heisenberg(lattice: Lattice, coupling: float = 1.0) -> Hamiltonian:
    """Isotropic Heisenberg model: J * (XX + YY + ZZ) on every bond."""
    terms = [
        PauliString({i: axis, j: axis}, coupling)
        for (i, j) in lattice.bonds
        for axis in ("X", "Y", "Z")
    ]
    return Hamiltonian(lattice.n_sites, terms)


def build_mean_field(n_sites: int) -> Hamiltonian:
    """All-pairs XX + YY + ZZ with unit couplings (3*N*(N-1)/2 terms)."""
    if n_sites < 2:
        raise ValueError("mean-field model needs at least 2 sites")
    terms = [
        PauliString({i: axis, j: axis}, 1.0)
        for i, j in itertools.combinations(range(n_sites), 2)
        for axis in ("X", "Y", "Z")
    ]
    return Hamiltonian(n_sites, terms)


def build_random_hamiltonian(n_sites: int, seed: int) -> Hamiltonian:
    """Random all-pairs model: a uniform third of all single-axis pair terms.

    All 3*C(N,2) candidate terms are enumerated, floor(count/3) of them are
    drawn without replacement and each selected term gets an independent
    coefficient uniform in the open interval (0, 10).
    """
    if n_sites < 2:
        raise ValueError("random model needs at least 2 sites")
    candidates = [
        (i, j, axis)
        for i, j in itertools.combinations(range(n_sites), 2)
        for axis in ("X", "Y", "Z")
    ]
    n_selected = len(candidates) // 3
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(candidates), size=n_selected, replace=False)
    coefficients = rng.uniform(0.0, 10.0, size=n_selected)
    while np.any(coefficients == 0.0):  # keep the interval open
        redraw = coefficients == 0.0
        coefficients[redraw] = rng.uniform(0.0, 10.0, size=int(redraw.sum()))
    terms = []
    for k, c in zip(chosen, coefficients):
        i, j, axis = candidates[int(k)]
        terms.append(PauliString({i: axis, j: axis}, float(c)))
    return Hamiltonian(n_sites, terms)


# ---------------------------------------------------------------------------
# Neel state

def two_colouring(n_sites: int, bonds) -> list[int]:
    """BFS two-colouring with site 0 anchored to colour 0.

    Raises NonBipartiteError naming an odd cycle if none exists.
    """
    adjacency = [[] for _ in range(n_sites)]
    for i, j in bonds:
        adjacency[i].append(j)
        adjacency[j].append(i)
    colour = [-1] * n_sites
    parent = [-1] * n_sites
    for root in range(n_sites):
        if colour[root] != -1:
            continue
        colour[root] = 0
        queue = [root]
        while queue:
            site = queue.pop(0)
            for other in adjacency[site]:
                if colour[other] == -1:
                    colour[other] = 1 - colour[site]
                    parent[other] = site
                    queue.append(other)
                elif colour[other] == colour[site]:
                    cycle = _frustrated_cycle(site, other, parent)
                    raise NonBipartiteError(
                        f"lattice is not bipartite: odd cycle {cycle}", cycle
                    )
    return colour


def _frustrated_cycle(a: int, b: int, parent) -> list[int]:
    path_a = [a]
    while parent[path_a[-1]] != -1:
        path_a.append(parent[path_a[-1]])
    path_b = [b]
    while parent[path_b[-1]] != -1:
        path_b.append(parent[path_b[-1]])
    common = next(s for s in path_a if s in path_b)
    return path_a[: path_a.index(common) + 1] + path_b[: path_b.index(common)][::-1]


def neel_bits(lattice: Lattice) -> str:
    """Alternating bitstring: colour-A sites -> 0, colour-B sites -> 1."""
    colour = two_colouring(lattice.n_sites, lattice.bonds)
    return "".join(str(c) for c in colour)


def neel_state(lattice: Lattice) -> tuple[str, StateVector]:
    bits = neel_bits(lattice)
    return bits, init_basis_state(lattice.n_sites, bits)


def alternating_bits(n_sites: int) -> str:
    """|...0101> pattern: even-indexed qubits 1, odd-indexed 0.

    Used as the starting state for the mean-field and random all-pairs
    models, which have no lattice to two-colour.
    """
    return "".join("1" if q % 2 == 0 else "0" for q in range(n_sites))


# ---------------------------------------------------------------------------
# Problem spec strings ("ring:12", "ladder:13x2", "square:6x6:periodic",
# "cube:3x3x4", "meanfield:5", "random:6:seed=7")

@dataclass
class Problem:
    """A Hamiltonian plus its problem-specific starting bitstring."""

    spec: str
    n_qubits: int
    hamiltonian: Hamiltonian
    start_bits: str
    lattice: Lattice | None = None


def parse_problem(spec: str, coupling: float = 1.0) -> Problem:
    """Build the Hamiltonian and starting state named by a CLI spec string.

    Rings default to periodic boundaries, 2D/3D lattices to open; a trailing
    ":periodic"/":open" overrides.  Lattice problems start from the Neel
    state, the mean-field and random models from the alternating bitstring.
    """
    parts = spec.split(":")
    kind = parts[0]

    if kind in ("ring", "chain", "ladder", "square", "cube"):
        boundary = "periodic" if kind == "ring" else "open"
        if parts[-1] in ("periodic", "open"):
            boundary = parts[-1]
            parts = parts[:-1]
        if len(parts) != 2:
            raise ValueError(f"malformed lattice spec {spec!r}")
        dims = tuple(int(d) for d in parts[1].split("x"))
        expected_rank = {"ring": 1, "chain": 1, "ladder": 2, "square": 2, "cube": 3}[kind]
        if len(dims) != expected_rank:
            raise ValueError(f"{kind} spec needs {expected_rank} extent(s), got {dims}")
        if any(d < 1 for d in dims):
            raise ValueError(f"extents must be >= 1 in {spec!r}")
        if kind == "chain":
            boundary = "open"
        lattice = build_lattice(dims, boundary)
        hamiltonian = build_heisenberg(lattice, coupling)
        bits = neel_bits(lattice)
        return Problem(spec, lattice.n_sites, hamiltonian, bits, lattice)

    if kind == "meanfield":
        if len(parts) != 2:
            raise ValueError(f"malformed spec {spec!r}")
        n = int(parts[1])
        return Problem(spec, n, build_mean_field(n), alternating_bits(n))

    if kind == "random":
        if len(parts) not in (2, 3):
            raise ValueError(f"malformed spec {spec!r}")
        n = int(parts[1])
        seed = 0
        if len(parts) == 3:
            key, _, value = parts[2].partition("=")
            if key != "seed" or not value:
                raise ValueError(f"malformed spec {spec!r} (expected seed=<int>)")
            seed = int(value)
        return Problem(spec, n, build_random_hamiltonian(n, seed), alternating_bits(n))

    raise ValueError(f"unknown problem kind {kind!r} in {spec!r}")


# ---------------------------------------------------------------------------
# Measurement grouping

def _single_axis(term: PauliString) -> str | None:
    letters = set(term.factors.values())
    return letters.pop() if len(letters) == 1 else None


def group_terms(hamiltonian: Hamiltonian) -> list[MeasurementGroup]:
    """Partition terms into simultaneously measurable groups.

    When every term uses a single Pauli axis (the Heisenberg and random
    models), the terms are grouped by axis into global X/Y/Z bases.  Mixed
    terms fall back to greedy first-fit on compatible per-qubit bases.
    """
    n = hamiltonian.n_qubits
    axes = [_single_axis(t) for t in hamiltonian.terms]
    if all(a is not None for a in axes):
        groups = {}
        for index, axis in enumerate(axes):
            if axis not in groups:
                groups[axis] = MeasurementGroup(basis=[axis] * n)
            groups[axis].term_indices.append(index)
        return [groups[a] for a in ("X", "Y", "Z") if a in groups]

    groups: list[tuple[dict[int, str], MeasurementGroup]] = []
    for index, term in enumerate(hamiltonian.terms):
        placed = False
        for constraints, group in groups:
            if all(constraints.get(q, p) == p for q, p in term.factors.items()):
                constraints.update(term.factors)
                group.term_indices.append(index)
                placed = True
                break
        if not placed:
            groups.append(
                (dict(term.factors), MeasurementGroup(basis=["Z"] * n, term_indices=[index]))
            )
    result = []
    for constraints, group in groups:
        for q, p in constraints.items():
            group.basis[q] = p
        result.append(group)
    return result
