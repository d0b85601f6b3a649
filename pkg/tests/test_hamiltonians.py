"""Tests for lattice construction, the spin Hamiltonians, Neel states and
measurement grouping."""

import itertools

import numpy as np
import pytest

from evoqe.errors import NonBipartiteError
from evoqe.exact import dense_ground_energy
from evoqe.hamiltonians import (
    build_heisenberg,
    build_lattice,
    build_mean_field,
    build_random_hamiltonian,
    group_terms,
    neel_bits,
    neel_state,
    parse_problem,
)
from evoqe.states import StateVector, init_basis_state


def enumerate_bonds(dims, boundary):
    """Brute-force bond oracle: coordinate pairs at Manhattan distance one,
    plus wraps for periodic extents > 2."""
    sites = list(itertools.product(*(range(d) for d in dims)))
    index = {c: k for k, c in enumerate(sites)}
    bonds = set()
    for coords in sites:
        for axis, extent in enumerate(dims):
            if extent < 2:
                continue
            neighbour = list(coords)
            if coords[axis] + 1 < extent:
                neighbour[axis] += 1
            elif boundary == "periodic" and extent > 2:
                neighbour[axis] = 0
            else:
                continue
            a, b = index[coords], index[tuple(neighbour)]
            bonds.add((min(a, b), max(a, b)))
    return bonds


class TestLattice:
    def test_ring4_periodic(self):
        lattice = build_lattice([4], "periodic")
        assert len(lattice.bonds) == 4

    def test_ladder_13x2_open(self):
        lattice = build_lattice([13, 2], "open")
        assert len(lattice.bonds) == 37  # 12*2 legs + 13 rungs

    def test_cube_3x3x2_open(self):
        lattice = build_lattice([3, 3, 2], "open")
        assert len(lattice.bonds) == 33
        assert lattice.bonds == sorted(enumerate_bonds((3, 3, 2), "open"))

    def test_bond_counts_match_enumeration(self):
        for rank in (1, 2, 3):
            for dims in itertools.product(range(1, 5), repeat=rank):
                if all(d < 2 for d in dims):
                    continue
                for boundary in ("open", "periodic"):
                    lattice = build_lattice(dims, boundary)
                    assert set(lattice.bonds) == enumerate_bonds(dims, boundary), (
                        dims, boundary,
                    )

    def test_open_bond_count_formula(self):
        for dims in [(5,), (4, 3), (2, 3, 4)]:
            lattice = build_lattice(dims, "open")
            expected = sum(
                (extent - 1) * np.prod([d for k, d in enumerate(dims) if k != axis])
                for axis, extent in enumerate(dims)
            )
            assert len(lattice.bonds) == expected

    def test_no_duplicates_or_self_pairs(self):
        lattice = build_lattice([3, 3, 3], "periodic")
        assert len(set(lattice.bonds)) == len(lattice.bonds)
        assert all(i != j for i, j in lattice.bonds)

    def test_bad_dims(self):
        with pytest.raises(ValueError):
            build_lattice([], "open")
        with pytest.raises(ValueError):
            build_lattice([1, 1], "open")


class TestHeisenberg:
    def test_term_count(self):
        lattice = build_lattice([4], "periodic")
        assert len(build_heisenberg(lattice).terms) == 12

    def test_neel_energy_is_minus_bonds(self):
        for dims, boundary in [([6], "periodic"), ([3, 3], "open"), ([3, 3, 2], "open")]:
            lattice = build_lattice(dims, boundary)
            hamiltonian = build_heisenberg(lattice)
            _, state = neel_state(lattice)
            assert hamiltonian.energy(state) == pytest.approx(-len(lattice.bonds))

    def test_ring4_ground_energy(self):
        hamiltonian = build_heisenberg(build_lattice([4], "periodic"))
        assert dense_ground_energy(hamiltonian).ground_energy == pytest.approx(-8.0)

    def test_energy_matches_termwise_expectation(self):
        from evoqe.states import expectation

        hamiltonian = build_heisenberg(build_lattice([5], "open"), coupling=1.3)
        rng = np.random.default_rng(0)
        amps = rng.normal(size=32) + 1j * rng.normal(size=32)
        state = StateVector(5, amps / np.linalg.norm(amps))
        termwise = sum(expectation(state, t) for t in hamiltonian.terms)
        assert hamiltonian.energy(state) == pytest.approx(termwise, abs=1e-10)


class TestMeanField:
    def test_term_count(self):
        assert len(build_mean_field(6).terms) == 45

    def test_ground_energy_n5(self):
        assert dense_ground_energy(build_mean_field(5)).ground_energy == pytest.approx(-6.0)

    def test_ground_energy_n2(self):
        assert dense_ground_energy(build_mean_field(2)).ground_energy == pytest.approx(-3.0)


class TestRandomHamiltonian:
    def test_deterministic(self):
        a = build_random_hamiltonian(6, seed=7)
        b = build_random_hamiltonian(6, seed=7)
        assert [(t.key(), t.coefficient) for t in a.terms] == [
            (t.key(), t.coefficient) for t in b.terms
        ]

    def test_term_count_and_range(self):
        hamiltonian = build_random_hamiltonian(6, seed=3)
        assert len(hamiltonian.terms) == 15  # floor(3*C(6,2) / 3)
        for seed in range(20):
            for term in build_random_hamiltonian(5, seed).terms:
                assert 0.0 < term.coefficient < 10.0

    def test_terms_are_single_axis_pairs(self):
        for term in build_random_hamiltonian(7, seed=1).terms:
            assert len(term.factors) == 2
            assert len(set(term.factors.values())) == 1


class TestNeel:
    def test_ring4_pattern(self):
        assert neel_bits(build_lattice([4], "periodic")) == "0101"

    def test_cube_333_per_spin(self):
        # 27 qubits is too large for a state vector; evaluate the basis-state
        # energy termwise (only the Z-axis terms are diagonal, XX/YY vanish)
        lattice = build_lattice([3, 3, 3], "open")
        hamiltonian = build_heisenberg(lattice)
        bits = neel_bits(lattice)
        energy = sum(
            term.coefficient * (-1.0 if bits[i] != bits[j] else 1.0)
            for term in hamiltonian.terms
            if set(term.factors.values()) == {"Z"}
            for i, j in [tuple(term.factors)]
        )
        assert energy / 27 == pytest.approx(-2.0)

    def test_odd_ring_not_bipartite(self):
        with pytest.raises(NonBipartiteError) as err:
            neel_bits(build_lattice([5], "periodic"))
        assert len(err.value.cycle) % 2 == 1  # an odd cycle is named

    def test_site0_anchored(self):
        for dims in [(6,), (3, 4)]:
            assert neel_bits(build_lattice(dims, "open"))[0] == "0"

    def test_neel_minimizes_over_basis_states(self):
        for dims, boundary in [([8], "periodic"), ([4, 2], "open"), ([2, 2, 3], "open")]:
            lattice = build_lattice(dims, boundary)
            hamiltonian = build_heisenberg(lattice)
            n = lattice.n_sites
            _, neel = neel_state(lattice)
            neel_energy = hamiltonian.energy(neel)
            energies = [
                hamiltonian.energy(init_basis_state(n, format(k, f"0{n}b")[::-1]))
                for k in range(1 << n)
            ]
            assert neel_energy == pytest.approx(min(energies))


class TestProblemSpecs:
    def test_ring_spec(self):
        problem = parse_problem("ring:6")
        assert problem.n_qubits == 6
        assert problem.start_bits == "010101"
        assert len(problem.hamiltonian.terms) == 18

    def test_square_periodic_override(self):
        problem = parse_problem("square:4x4:periodic")
        assert len(problem.lattice.bonds) == 32

    def test_random_spec_seeded(self):
        a = parse_problem("random:6:seed=7").hamiltonian
        b = build_random_hamiltonian(6, 7)
        assert [t.key() for t in a.terms] == [t.key() for t in b.terms]

    def test_meanfield_spec(self):
        assert parse_problem("meanfield:5").start_bits == "10101"

    def test_malformed_specs(self):
        for bad in ["ring:-3", "ring", "torus:4", "ladder:4", "random:6:sd=1"]:
            with pytest.raises(ValueError):
                parse_problem(bad)


class TestGrouping:
    def test_heisenberg_three_groups(self):
        hamiltonian = build_heisenberg(build_lattice([6], "periodic"))
        groups = group_terms(hamiltonian)
        assert len(groups) == 3
        assert sorted(g.basis[0] for g in groups) == ["X", "Y", "Z"]

    def test_single_term(self):
        from evoqe.states import PauliString

        hamiltonian = type(build_mean_field(2))(2, [PauliString({0: "Z", 1: "Z"}, 1.0)])
        assert len(group_terms(hamiltonian)) == 1

    def test_random_hamiltonian_three_groups(self):
        assert len(group_terms(build_random_hamiltonian(8, seed=4))) == 3

    def test_partition_is_complete(self):
        hamiltonian = build_random_hamiltonian(7, seed=9)
        groups = group_terms(hamiltonian)
        members = sorted(i for g in groups for i in g.term_indices)
        assert members == list(range(len(hamiltonian.terms)))

    def test_mixed_terms_greedy_fallback(self):
        from evoqe.states import PauliString

        terms = [
            PauliString({0: "X", 1: "Z"}, 1.0),
            PauliString({0: "X", 2: "Y"}, 1.0),
            PauliString({0: "Z", 1: "Z"}, 1.0),
        ]
        hamiltonian = type(build_mean_field(2))(3, terms)
        groups = group_terms(hamiltonian)
        members = sorted(i for g in groups for i in g.term_indices)
        assert members == [0, 1, 2]
        # groups 0 and 1 share the X constraint on qubit 0, term 2 conflicts
        assert len(groups) == 2
