"""Gradient-based energy minimization with full evaluation accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ansatz import Ansatz
from .errors import NumericalError
from .hamiltonians import Hamiltonian
from .states import StateVector


@dataclass
class OptimizerConfig:
    grad_tol: float = 1e-6
    energy_tol: float = 1e-9
    max_iterations: int | None = None  # defaults to 10 * n_params

    # Backtracking line search; standard Armijo defaults.
    armijo_c: float = 1e-4
    contraction: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 40


class EnergyObjective:
    """Counts every energy evaluation and keeps the running best point.

    Gradient-shift evaluations go through the same counter, so
    ``n_evaluations`` is the total number of circuit executions an
    experiment would need.
    """

    def __init__(self, hamiltonian: Hamiltonian, ansatz: Ansatz, base_state: StateVector):
        if base_state.n_qubits != hamiltonian.n_qubits:
            raise ValueError("state and Hamiltonian qubit counts differ")
        self.hamiltonian = hamiltonian
        self.ansatz = ansatz
        self.base_state = base_state
        self.n_evaluations = 0
        self.n_gradient_calls = 0
        self.trajectory: list[tuple[int, float]] = []
        self.best_energy = np.inf
        self.best_params: np.ndarray | None = None

    @property
    def n_params(self) -> int:
        return self.ansatz.n_params

    def state_at(self, params) -> StateVector:
        return self.ansatz.apply(self.base_state.copy(), np.asarray(params, dtype=float))

    def energy(self, params) -> float:
        value = self.hamiltonian.energy(self.state_at(params))
        if not np.isfinite(value):
            raise NumericalError("non-finite energy", params=np.asarray(params))
        self.n_evaluations += 1
        self.trajectory.append((self.n_evaluations, value))
        if value < self.best_energy:
            self.best_energy = value
            self.best_params = np.array(params, dtype=float)
        return value

    def gradient(self, params) -> np.ndarray:
        """Parameter-shift gradient: [E(t + pi/2) - E(t - pi/2)] / 2 per slot.

        Exact for Pauli generators under the half-angle convention; costs two
        counted evaluations per parameter.
        """
        params = np.asarray(params, dtype=float)
        grad = np.empty_like(params)
        for j in range(len(params)):
            shifted = params.copy()
            shifted[j] = params[j] + 0.5 * np.pi
            plus = self.energy(shifted)
            shifted[j] = params[j] - 0.5 * np.pi
            minus = self.energy(shifted)
            grad[j] = 0.5 * (plus - minus)
        self.n_gradient_calls += 1
        return grad


@dataclass
class OptimizerResult:
    params: np.ndarray
    energy: float
    n_iterations: int
    n_evaluations: int
    converged: bool
    trajectory: list[tuple[int, float]] = field(repr=False)
    n_gradient_calls: int = 0


def parameter_shift_gradient(
    hamiltonian: Hamiltonian, ansatz: Ansatz, params, base_state: StateVector
) -> np.ndarray:
    """One-off parameter-shift gradient without persistent accounting."""
    return EnergyObjective(hamiltonian, ansatz, base_state).gradient(params)


def minimize(
    objective: EnergyObjective, init_params, config: OptimizerConfig | None = None
) -> OptimizerResult:
    """BFGS with inverse-Hessian updates and Armijo backtracking.

    Accepted steps never increase the energy; stops on small gradient
    infinity-norm, small energy improvement, or the iteration cap.
    """
    config = config or OptimizerConfig()
    x = np.asarray(init_params, dtype=float).copy()
    n = len(x)
    if n != objective.n_params:
        raise ValueError(f"expected {objective.n_params} parameters, got {n}")
    max_iterations = config.max_iterations
    if max_iterations is None:
        max_iterations = 10 * max(n, 1)

    f = objective.energy(x)
    g = objective.gradient(x)
    h_inv = np.eye(n)
    iterations = 0
    converged = np.linalg.norm(g, np.inf) < config.grad_tol

    while not converged and iterations < max_iterations:
        direction = -h_inv @ g
        slope = float(direction @ g)
        if slope >= 0:  # stale curvature; fall back to steepest descent
            h_inv = np.eye(n)
            direction = -g
            slope = float(direction @ g)
            if slope == 0.0:
                converged = True
                break

        step = config.initial_step
        f_new = None
        for _ in range(config.max_backtracks):
            candidate = x + step * direction
            f_candidate = objective.energy(candidate)
            if f_candidate <= f + config.armijo_c * step * slope:
                f_new = f_candidate
                break
            step *= config.contraction
        if f_new is None:
            converged = True  # no decrease along a descent direction
            break

        x_new = x + step * direction
        g_new = objective.gradient(x_new)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12:
            rho = 1.0 / sy
            outer = np.outer(s, y)
            h_inv = (
                (np.eye(n) - rho * outer) @ h_inv @ (np.eye(n) - rho * outer.T)
                + rho * np.outer(s, s)
            )
        improvement = f - f_new
        x, f, g = x_new, f_new, g_new
        iterations += 1
        if np.linalg.norm(g, np.inf) < config.grad_tol:
            converged = True
        elif improvement < config.energy_tol:
            converged = True

    return OptimizerResult(
        params=objective.best_params if objective.best_params is not None else x,
        energy=objective.best_energy,
        n_iterations=iterations,
        n_evaluations=objective.n_evaluations,
        converged=converged,
        trajectory=objective.trajectory,
        n_gradient_calls=objective.n_gradient_calls,
    )
