"""Ground-truth energies: dense diagonalization, matrix-free Lanczos and the
closed-form mean-field ground energy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, NumericalError
from .hamiltonians import Hamiltonian
from .states import PauliString, _indices, _masks, _parity_signs

DENSE_MAX_QUBITS = 14
LANCZOS_MAX_QUBITS = 28


@dataclass
class SpectrumResult:
    eigenvalues: list[float]  # ascending
    n_qubits: int
    method: str  # "dense" | "lanczos"
    residual_norms: list[float]

    @property
    def ground_energy(self) -> float:
        return self.eigenvalues[0]


def mean_field_exact(n_sites: int) -> float:
    """Ground energy of the unit-coupling all-pairs model: 3*(a - N)/2 with
    a = 1 for odd N and a = 0 for even N."""
    if n_sites < 2:
        raise ValueError("mean-field model needs at least 2 sites")
    return 3.0 * ((n_sites % 2) - n_sites) / 2.0


# ---------------------------------------------------------------------------
# Term action tables

def _term_tables(hamiltonian: Hamiltonian):
    """Per-term (flip mask, sign mask, scalar prefactor) for the mat-vec.

    Terms with an even number of Y factors have real prefactors; when all
    terms do, the whole matrix is real symmetric.
    """
    tables = []
    all_real = True
    for term in hamiltonian.terms:
        flip, sign_mask, n_y = _masks(term)
        prefactor = term.coefficient * (-1j) ** n_y
        if n_y % 2 == 0:
            prefactor = prefactor.real
        else:
            all_real = False
        tables.append((flip, sign_mask, prefactor))
    return tables, all_real


def apply_hamiltonian(hamiltonian: Hamiltonian, vector: np.ndarray) -> np.ndarray:
    """H @ v over the full 2^N space, term by term."""
    n = hamiltonian.n_qubits
    idx = _indices(n)
    tables, _ = _term_tables(hamiltonian)
    out = np.zeros_like(vector)
    for flip, sign_mask, prefactor in tables:
        piece = vector[idx ^ flip] if flip else vector
        if sign_mask:
            piece = piece * _parity_signs(n, sign_mask)
        out += prefactor * piece
    return out


def _conserves_magnetization(hamiltonian: Hamiltonian) -> bool:
    """True when every term flips an even number of bits with X/Y paired,
    i.e. the total-Sz sectors are invariant."""
    for term in hamiltonian.terms:
        n_flip = sum(1 for p in term.factors.values() if p in ("X", "Y"))
        if n_flip % 2 != 0:
            return False
    return True


class _SectorMatvec:
    """Mat-vec restricted to the fixed-magnetization (popcount) sector."""

    def __init__(self, hamiltonian: Hamiltonian, n_up: int):
        n = hamiltonian.n_qubits
        idx = _indices(n)
        self.states = idx[np.bitwise_count(idx) == n_up]
        self.n_up = n_up
        self.dim = len(self.states)
        self.tables, self.real = _term_tables(hamiltonian)
        self.n_qubits = n

    def __call__(self, vector: np.ndarray) -> np.ndarray:
        # Row form, matching states.pauli_apply:
        # (H v)[j] += prefactor * (-1)^popcount(j & maskYZ) * v[j ^ flip].
        out = np.zeros_like(vector)
        for flip, sign_mask, prefactor in self.tables:
            if flip:
                # A lone XX or YY term maps part of the sector outside it
                # (their sum conserves magnetization, each summand does not);
                # those contributions belong to the complementary sector and
                # are dropped.
                targets = self.states ^ flip
                inside = np.bitwise_count(targets) == self.n_up
                positions = np.searchsorted(self.states, np.where(inside, targets, 0))
                piece = prefactor * np.where(inside, vector[positions], 0.0)
            else:
                piece = prefactor * vector
            if sign_mask:
                signs = 1.0 - 2.0 * (np.bitwise_count(self.states & sign_mask) & 1)
                piece = piece * signs
            out += piece
        return out


# ---------------------------------------------------------------------------
# Dense diagonalization

def dense_matrix(hamiltonian: Hamiltonian) -> np.ndarray:
    n = hamiltonian.n_qubits
    dim = 1 << n
    idx = _indices(n)
    tables, all_real = _term_tables(hamiltonian)
    matrix = np.zeros((dim, dim), dtype=np.float64 if all_real else np.complex128)
    for flip, sign_mask, prefactor in tables:
        values = np.full(dim, prefactor)
        if sign_mask:
            values = values * _parity_signs(n, sign_mask)
        matrix[idx, idx ^ flip] += values
    return matrix


def dense_ground_energy(hamiltonian: Hamiltonian, n_eigenvalues: int = 1) -> SpectrumResult:
    """Full-accuracy lowest eigenvalues; limited to 2^14 dimensions."""
    if hamiltonian.n_qubits > DENSE_MAX_QUBITS:
        raise CapacityError(
            f"dense diagonalization capped at {DENSE_MAX_QUBITS} qubits "
            f"(got {hamiltonian.n_qubits}); use lanczos_ground_energy"
        )
    eigenvalues = np.linalg.eigvalsh(dense_matrix(hamiltonian))
    lowest = [float(v) for v in eigenvalues[:n_eigenvalues]]
    return SpectrumResult(lowest, hamiltonian.n_qubits, "dense", [0.0] * len(lowest))


# ---------------------------------------------------------------------------
# Lanczos

def _lanczos_lowest(matvec, dim, dtype, seed, deflate, tol, max_dim, max_restarts):
    """Lowest eigenpair via fully reorthogonalized Lanczos with restarts.

    ``deflate`` vectors are projected out, which turns the run into a search
    for the next eigenvalue up.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim).astype(dtype)
    if np.issubdtype(dtype, np.complexfloating):
        v = v + 1j * rng.standard_normal(dim)

    def project(w):
        for d in deflate:
            w -= np.vdot(d, w) * d
        return w

    v = project(v)
    v /= np.linalg.norm(v)
    max_dim = min(max_dim, dim)

    for _ in range(max_restarts):
        basis = np.empty((max_dim, dim), dtype=dtype)
        basis[0] = v
        alphas: list[float] = []
        betas: list[float] = []
        ritz_value, ritz_vector = None, None
        for j in range(max_dim):
            w = matvec(basis[j])
            alphas.append(float(np.vdot(basis[j], w).real))
            # Full reorthogonalization, twice for safety.
            for _ in range(2):
                w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
                w = project(w)
            beta = float(np.linalg.norm(w))
            tri = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            values, vectors = np.linalg.eigh(tri)
            ritz_value = float(values[0])
            ritz_coeff = vectors[:, 0]
            residual_estimate = beta * abs(ritz_coeff[-1])
            if residual_estimate < tol or beta < 1e-14 or j + 1 == max_dim:
                ritz_vector = basis[: j + 1].T @ ritz_coeff.astype(dtype)
                ritz_vector = project(ritz_vector)
                ritz_vector /= np.linalg.norm(ritz_vector)
                break
            betas.append(beta)
            basis[j + 1] = w / beta

        residual = float(np.linalg.norm(matvec(ritz_vector) - ritz_value * ritz_vector))
        if residual < tol:
            return ritz_value, ritz_vector, residual
        v = ritz_vector  # restart from the best Ritz vector

    raise NumericalError(
        f"Lanczos failed to reach residual {tol:g} (last {residual:g})",
        residuals=[residual],
    )


def lanczos_ground_energy(
    hamiltonian: Hamiltonian,
    n_eigenvalues: int = 1,
    tol: float = 1e-9,
    max_dim: int = 300,
    max_restarts: int = 20,
    seed: int = 0,
    use_sector: bool | None = None,
) -> SpectrumResult:
    """Lowest eigenvalues with matrix-free, fully reorthogonalized Lanczos.

    The first excited state is obtained by deflating the converged ground
    vector, which also resolves degenerate ground spaces.  The zero-
    magnetization sector restriction kicks in automatically at >= 22 qubits
    for magnetization-conserving Hamiltonians.
    """
    n = hamiltonian.n_qubits
    if n > LANCZOS_MAX_QUBITS:
        raise CapacityError(f"Lanczos capped at {LANCZOS_MAX_QUBITS} qubits (got {n})")
    if use_sector is None:
        use_sector = n >= 22 and n % 2 == 0 and _conserves_magnetization(hamiltonian)

    if use_sector:
        if not _conserves_magnetization(hamiltonian):
            raise ValueError("sector restriction requires a magnetization-conserving Hamiltonian")
        matvec = _SectorMatvec(hamiltonian, n // 2)
        dim = matvec.dim
        real = matvec.real
    else:
        _, real = _term_tables(hamiltonian)
        matvec = lambda v: apply_hamiltonian(hamiltonian, v)
        dim = 1 << n

    dtype = np.float64 if real else np.complex128
    max_dim = min(max_dim, dim)

    eigenvalues = []
    residuals = []
    deflate: list[np.ndarray] = []
    for k in range(n_eigenvalues):
        value, vector, residual = _lanczos_lowest(
            matvec, dim, dtype, seed + k, deflate, tol, max_dim, max_restarts
        )
        eigenvalues.append(value)
        residuals.append(residual)
        deflate.append(vector)
    return SpectrumResult(eigenvalues, n, "lanczos", residuals)
