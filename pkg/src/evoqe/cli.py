"""Experiment driver: desk-scale runs with reproducible JSONL/CSV output.

Exit codes: 0 success, 2 usage/config error, 3 capacity exceeded,
4 numerical failure.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .ansatz import parse_ansatz_spec
from .errors import CapacityError, NumericalError
from .evolution import EvolutionConfig, energy_fidelity, run_evolution
from .exact import (
    DENSE_MAX_QUBITS,
    LANCZOS_MAX_QUBITS,
    dense_ground_energy,
    lanczos_ground_energy,
    mean_field_exact,
)
from .hamiltonians import Problem, group_terms, parse_problem
from .optimize import EnergyObjective, OptimizerConfig
from .runtime import PROFILES, build_runtime_estimate, sequential_gate_depth
from .sampling import count_unique_bitstrings, estimate_energy_sampled
from .states import Gate, init_basis_state

ORACLE_MAX_QUBITS = 20  # Lanczos reference attached up to here


# ---------------------------------------------------------------------------
# Output plumbing

def _config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


class Emitter:
    """Writes JSONL records wrapped with provenance (config hash, seed,
    version); the timestamp lives outside the hashed payload."""

    def __init__(self, output: str | None, config: dict, seed: int):
        self.stream = open(output, "w") if output and output != "-" else sys.stdout
        self.owns_stream = self.stream is not sys.stdout
        self.config = config
        self.hash = _config_hash(config)
        self.seed = seed

    def emit(self, kind: str, payload: dict) -> None:
        record = {
            "type": kind,
            **payload,
            "config": self.config,
            "config_hash": self.hash,
            "seed": self.seed,
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        self.stream.write(json.dumps(record) + "\n")
        self.stream.flush()

    def close(self) -> None:
        if self.owns_stream:
            self.stream.close()


def _load_config_file(ctx, param, value):
    """KEY=VALUE lines become defaults; explicit flags still win."""
    if not value:
        return value
    defaults = {}
    for line_number, raw in enumerate(Path(value).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise click.UsageError(f"{value}:{line_number}: expected KEY=VALUE, got {raw!r}")
        defaults[key.strip().replace("-", "_")] = val.strip()
    ctx.default_map = {**(ctx.default_map or {}), **defaults}
    return value


def _common_options(fn):
    fn = click.option(
        "--config", type=click.Path(exists=True), callback=_load_config_file,
        expose_value=False, is_eager=True, help="KEY=VALUE defaults file.",
    )(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--output", "-o", default="-", help="JSONL path ('-' = stdout).")(fn)
    fn = click.option(
        "--plot-dir", type=click.Path(), default=None,
        help="Also render matplotlib figures into this directory.",
    )(fn)
    return fn


def _run(body):
    """Map domain errors onto the exit-code contract."""
    try:
        body()
    except CapacityError as err:
        click.echo(f"capacity error: {err}", err=True)
        sys.exit(3)
    except NumericalError as err:
        click.echo(f"numerical error: {err}", err=True)
        sys.exit(4)
    except (ValueError, OSError) as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)


# ---------------------------------------------------------------------------
# Shared experiment setup

def _default_ansatz_for(problem: Problem) -> str:
    return "meanfield" if problem.spec.startswith("meanfield") else "xy"

def _resolve_initial(problem: Problem, n_params: int, init: str, seed: int):
    """Returns (initial StateVector, initial parameter vector)."""
    if init == "neel":
        return init_basis_state(problem.n_qubits, problem.start_bits), np.zeros(n_params)
    if init == "random-params":
        rng = np.random.default_rng(seed)
        params = rng.uniform(0.0, 2.0 * np.pi, n_params)
        return init_basis_state(problem.n_qubits, problem.start_bits), params
    if set(init) <= {"0", "1"}:
        return init_basis_state(problem.n_qubits, init), np.zeros(n_params)
    raise ValueError(f"init must be neel, random-params or a bitstring, got {init!r}")


def _oracle_energy(problem: Problem) -> float | None:
    if problem.spec.startswith("meanfield"):
        return mean_field_exact(problem.n_qubits)
    if problem.n_qubits <= DENSE_MAX_QUBITS:
        return dense_ground_energy(problem.hamiltonian).ground_energy
    if problem.n_qubits <= ORACLE_MAX_QUBITS:
        return lanczos_ground_energy(problem.hamiltonian).ground_energy
    return None


def _optimizer_config(grad_tol, energy_tol, max_iter) -> OptimizerConfig:
    return OptimizerConfig(grad_tol=grad_tol, energy_tol=energy_tol, max_iterations=max_iter)


# ---------------------------------------------------------------------------
# Commands

@click.group()
@click.version_option(__version__)
def main():
    """VQE workbench with the quasi-dynamical evolution heuristic."""


@main.command("run-evolution")
@click.argument("spec")
@click.option("--ansatz", "ansatz_spec", default=None, help="Defaults to xy (meanfield for meanfield specs).")
@click.option("--init", default="neel", show_default=True, help="neel | random-params | <bitstring>.")
@click.option("--cycles", type=int, default=3, show_default=True, help="Evolution cycles after the plain VQE run.")
@click.option("--stall", type=float, default=1e-4, show_default=True)
@click.option("--mode", type=click.Choice(["frozen-state", "deep-circuit"]), default="frozen-state", show_default=True)
@click.option("--grad-tol", type=float, default=1e-6, show_default=True)
@click.option("--energy-tol", type=float, default=1e-9, show_default=True)
@click.option("--max-iter", type=int, default=None)
@_common_options
def cmd_run_evolution(spec, ansatz_spec, init, cycles, stall, mode, grad_tol,
                      energy_tol, max_iter, seed, output, plot_dir):
    """Run the evolution heuristic; one JSONL record per cycle."""

    def body():
        problem = parse_problem(spec)
        ansatz_name = ansatz_spec or _default_ansatz_for(problem)
        ansatz = parse_ansatz_spec(ansatz_name, problem.n_qubits)
        state, params = _resolve_initial(problem, ansatz.n_params, init, seed)
        reference = _oracle_energy(problem)
        config = {
            "command": "run-evolution", "spec": spec, "ansatz": ansatz_name,
            "init": init, "cycles": cycles, "stall": stall, "mode": mode,
            "grad_tol": grad_tol, "energy_tol": energy_tol, "max_iter": max_iter,
        }
        emitter = Emitter(output, config, seed)
        evo_config = EvolutionConfig(
            max_cycles=cycles, stall_threshold=stall, mode=mode,
            optimizer=_optimizer_config(grad_tol, energy_tol, max_iter),
        )
        start = time.perf_counter()
        result = run_evolution(problem.hamiltonian, ansatz, state, evo_config, params)
        for record in result.cycles:
            payload = {
                "cycle": record.cycle,
                "energy": record.end_energy,
                "start_energy": record.start_energy,
                "evals": record.n_evaluations,
                "iterations": record.n_iterations,
                "converged": record.converged,
                "wall_seconds": time.perf_counter() - start,
            }
            if reference is not None:
                payload["fidelity"] = energy_fidelity(record.end_energy, reference)
                payload["ground_energy"] = reference
            emitter.emit("cycle", payload)
        if plot_dir:
            from . import plots
            energies = [c.end_energy for c in result.cycles]
            plots.plot_cycle_energies(energies, Path(plot_dir) / "cycle_energies.png", reference)
            trajectory = [t for c in result.cycles for t in c.trajectory]
            trajectory = [(k + 1, e) for k, (_, e) in enumerate(trajectory)]
            plots.plot_trajectory(trajectory, Path(plot_dir) / "trajectory.png")
        emitter.close()

    _run(body)


@main.command("census")
@click.argument("spec")
@click.option("--ansatz", "ansatz_spec", default=None)
@click.option("--restarts", type=int, default=100, show_default=True)
@click.option("--rounding", type=float, default=1e-3, show_default=True)
@click.option("--grad-tol", type=float, default=1e-6, show_default=True)
@click.option("--energy-tol", type=float, default=1e-9, show_default=True)
@click.option("--max-iter", type=int, default=None)
@_common_options
def cmd_census(spec, ansatz_spec, restarts, rounding, grad_tol, energy_tol,
               max_iter, seed, output, plot_dir):
    """Count distinct local-minimum energies over random-parameter restarts."""

    def body():
        if restarts < 1 or rounding <= 0:
            raise ValueError("restarts must be >= 1 and rounding > 0")
        problem = parse_problem(spec)
        ansatz_name = ansatz_spec or _default_ansatz_for(problem)
        ansatz = parse_ansatz_spec(ansatz_name, problem.n_qubits)
        reference = _oracle_energy(problem)
        neel = init_basis_state(problem.n_qubits, problem.start_bits)
        neel_energy = problem.hamiltonian.energy(neel)
        config = {
            "command": "census", "spec": spec, "ansatz": ansatz_name,
            "restarts": restarts, "rounding": rounding,
            "grad_tol": grad_tol, "energy_tol": energy_tol, "max_iter": max_iter,
        }
        emitter = Emitter(output, config, seed)
        opt_config = _optimizer_config(grad_tol, energy_tol, max_iter)
        rng = np.random.default_rng(seed)
        finals = []
        from .optimize import minimize

        for _ in range(restarts):
            params = rng.uniform(0.0, 2.0 * np.pi, ansatz.n_params)
            objective = EnergyObjective(problem.hamiltonian, ansatz, neel)
            finals.append(minimize(objective, params, opt_config).energy)
        rounded = np.round(np.array(finals) / rounding) * rounding
        unique = int(len(np.unique(rounded)))
        payload = {
            "restarts": restarts,
            "unique_count": unique,
            "unique_pct": 100.0 * unique / restarts,
            "min_energy": float(np.min(finals)),
            "mean_energy": float(np.mean(finals)),
            "max_energy": float(np.max(finals)),
            "neel_energy": neel_energy,
        }
        if reference is not None:
            payload["ground_energy"] = reference
        emitter.emit("census", payload)
        if plot_dir:
            from . import plots
            plots.plot_census(finals, Path(plot_dir) / "census.png", reference, neel_energy)
        emitter.close()

    _run(body)


@main.command("landscape")
@click.argument("spec")
@click.option("--ansatz", "ansatz_spec", default="meanfield", show_default=True)
@click.option("--grid", type=int, default=16, show_default=True)
@_common_options
def cmd_landscape(spec, ansatz_spec, grid, seed, output, plot_dir):
    """Energy grid over a two-parameter ansatz, emitted as CSV."""

    def body():
        if grid < 2:
            raise ValueError("grid must be >= 2")
        problem = parse_problem(spec)
        ansatz = parse_ansatz_spec(ansatz_spec, problem.n_qubits)
        if ansatz.n_params != 2:
            raise ValueError(
                f"landscape needs exactly 2 parameters, {ansatz_spec} on "
                f"{problem.n_qubits} qubits has {ansatz.n_params}"
            )
        state = init_basis_state(problem.n_qubits, problem.start_bits)
        thetas = 2.0 * np.pi * np.arange(grid) / grid
        energies = np.empty((grid, grid))
        for i, t1 in enumerate(thetas):
            for j, t2 in enumerate(thetas):
                energies[i, j] = problem.hamiltonian.energy(
                    ansatz.apply(state.copy(), np.array([t1, t2]))
                )
        stream = open(output, "w", newline="") if output != "-" else sys.stdout
        writer = csv.writer(stream)
        writer.writerow(["theta1", "theta2", "energy"])
        for i, t1 in enumerate(thetas):
            for j, t2 in enumerate(thetas):
                writer.writerow([f"{t1:.12g}", f"{t2:.12g}", f"{energies[i, j]:.12g}"])
        if stream is not sys.stdout:
            stream.close()
        if plot_dir:
            from . import plots
            plots.plot_landscape(thetas, thetas, energies, Path(plot_dir) / "landscape.png")

    _run(body)


@main.command("random-batch")
@click.option("--n", "n_sites", type=int, default=6, show_default=True)
@click.option("--instances", type=int, default=50, show_default=True)
@click.option("--cycles", type=int, default=9, show_default=True)
@click.option("--ansatz", "ansatz_spec", default=None,
              help="Defaults to xy-half for N=6 and xy otherwise.")
@click.option("--stall", type=float, default=1e-4, show_default=True)
@click.option("--grad-tol", type=float, default=1e-6, show_default=True)
@click.option("--energy-tol", type=float, default=1e-9, show_default=True)
@click.option("--max-iter", type=int, default=None)
@_common_options
def cmd_random_batch(n_sites, instances, cycles, ansatz_spec, stall, grad_tol,
                     energy_tol, max_iter, seed, output, plot_dir):
    """Evolution on random Hamiltonians: one record per instance with the
    ratio of the plain-VQE energy to the evolved energy."""

    def body():
        if instances < 1:
            raise ValueError("instances must be >= 1")
        ansatz_name = ansatz_spec or ("xy-half" if n_sites <= 6 else "xy")
        config = {
            "command": "random-batch", "n": n_sites, "instances": instances,
            "cycles": cycles, "ansatz": ansatz_name, "stall": stall,
            "grad_tol": grad_tol, "energy_tol": energy_tol, "max_iter": max_iter,
        }
        emitter = Emitter(output, config, seed)
        evo_config = EvolutionConfig(
            max_cycles=cycles, stall_threshold=stall,
            optimizer=_optimizer_config(grad_tol, energy_tol, max_iter),
        )
        master = np.random.SeedSequence(seed)
        instance_seeds = [int(s.generate_state(1)[0] % 2**31) for s in master.spawn(instances)]
        ratios = []
        for instance, instance_seed in enumerate(instance_seeds):
            problem = parse_problem(f"random:{n_sites}:seed={instance_seed}")
            ansatz = parse_ansatz_spec(ansatz_name, n_sites)
            state, params = _resolve_initial(problem, ansatz.n_params, "random-params", instance_seed)
            result = run_evolution(problem.hamiltonian, ansatz, state, evo_config, params)
            e1 = result.cycles[0].end_energy
            e2 = result.final_energy
            ratio = e1 / e2 if e2 != 0 else float("nan")
            ratios.append(ratio)
            emitter.emit("instance", {
                "instance": instance,
                "instance_seed": instance_seed,
                "vqe_energy": e1,
                "evolved_energy": e2,
                "ratio": ratio,
                "cycles_run": len(result.cycles) - 1,
                "evals": result.total_evaluations,
            })
        emitter.emit("summary", {
            "instances": instances,
            "mean_ratio": float(np.mean(ratios)),
            "max_ratio": float(np.max(ratios)),
        })
        if plot_dir:
            from . import plots
            plots.plot_batch_ratios(ratios, Path(plot_dir) / "batch_ratios.png")
        emitter.close()

    _run(body)


@main.command("plateau-probe")
@click.argument("spec")
@click.option("--ansatz", "ansatz_spec", default=None)
@click.option("--trials", type=int, default=1000, show_default=True)
@_common_options
def cmd_plateau_probe(spec, ansatz_spec, trials, seed, output, plot_dir):
    """Energies at random parameter points (no optimization): flat-landscape
    statistics against the problem-specific start energy."""

    def body():
        if trials < 1:
            raise ValueError("trials must be >= 1")
        problem = parse_problem(spec)
        ansatz_name = ansatz_spec or _default_ansatz_for(problem)
        ansatz = parse_ansatz_spec(ansatz_name, problem.n_qubits)
        state = init_basis_state(problem.n_qubits, problem.start_bits)
        neel_energy = problem.hamiltonian.energy(state)
        config = {"command": "plateau-probe", "spec": spec, "ansatz": ansatz_name,
                  "trials": trials}
        emitter = Emitter(output, config, seed)
        rng = np.random.default_rng(seed)
        energies = np.empty(trials)
        for k in range(trials):
            params = rng.uniform(0.0, 2.0 * np.pi, ansatz.n_params)
            energies[k] = problem.hamiltonian.energy(ansatz.apply(state.copy(), params))
        emitter.emit("plateau-probe", {
            "trials": trials,
            "mean_energy": float(energies.mean()),
            "min_energy": float(energies.min()),
            "max_energy": float(energies.max()),
            "neel_energy": neel_energy,
        })
        if plot_dir:
            from . import plots
            plots.plot_census(list(energies), Path(plot_dir) / "plateau_probe.png",
                              None, neel_energy)
        emitter.close()

    _run(body)


@main.command("sample-analysis")
@click.argument("spec")
@click.option("--ansatz", "ansatz_spec", default=None)
@click.option("--shots", type=int, default=8192, show_default=True)
@click.option("--cycles", type=int, default=0, show_default=True,
              help="Evolution cycles before sampling (0 = plain VQE).")
@click.option("--split-total", is_flag=True,
              help="Split the shot budget over groups instead of per group.")
@click.option("--grad-tol", type=float, default=1e-6, show_default=True)
@click.option("--energy-tol", type=float, default=1e-9, show_default=True)
@click.option("--max-iter", type=int, default=None)
@_common_options
def cmd_sample_analysis(spec, ansatz_spec, shots, cycles, split_total, grad_tol,
                        energy_tol, max_iter, seed, output, plot_dir):
    """Optimize, then estimate the energy from finite shots and count unique
    sampled bitstrings."""

    def body():
        problem = parse_problem(spec)
        ansatz_name = ansatz_spec or _default_ansatz_for(problem)
        ansatz = parse_ansatz_spec(ansatz_name, problem.n_qubits)
        state, params = _resolve_initial(problem, ansatz.n_params, "neel", seed)
        config = {
            "command": "sample-analysis", "spec": spec, "ansatz": ansatz_name,
            "shots": shots, "cycles": cycles, "split_total": split_total,
            "grad_tol": grad_tol, "energy_tol": energy_tol, "max_iter": max_iter,
        }
        emitter = Emitter(output, config, seed)
        if cycles > 0:
            evo_config = EvolutionConfig(
                max_cycles=cycles,
                optimizer=_optimizer_config(grad_tol, energy_tol, max_iter),
            )
            optimized = run_evolution(problem.hamiltonian, ansatz, state, evo_config, params)
            final_state = optimized.final_state
        else:
            from .evolution import run_vqe
            record = run_vqe(problem.hamiltonian, ansatz, state, params,
                             _optimizer_config(grad_tol, energy_tol, max_iter))
            final_state = record.state
        exact_energy = problem.hamiltonian.energy(final_state)
        estimate = estimate_energy_sampled(
            final_state, problem.hamiltonian, shots, seed, split_total=split_total
        )
        unique = count_unique_bitstrings(final_state, shots, seed)
        reference = _oracle_energy(problem)
        payload = {
            "lattice": spec,
            "shots": estimate.shots_per_group,
            "shots_convention": "split-total" if split_total else "per-group",
            "groups": estimate.n_groups,
            "unique_count": unique,
            "sampled_energy": estimate.energy,
            "exact_energy": exact_energy,
            "standard_error": estimate.standard_error,
        }
        if reference is not None:
            payload["fidelity"] = energy_fidelity(estimate.energy, reference)
            payload["ground_energy"] = reference
        emitter.emit("sample-analysis", payload)
        emitter.close()

    _run(body)


@main.command("exact")
@click.argument("spec")
@click.option("--k", "n_eigenvalues", type=int, default=1, show_default=True)
@click.option("--method", type=click.Choice(["auto", "dense", "lanczos"]),
              default="auto", show_default=True)
@_common_options
def cmd_exact(spec, n_eigenvalues, method, seed, output, plot_dir):
    """Reference eigenvalues via dense diagonalization or Lanczos."""

    def body():
        problem = parse_problem(spec)
        config = {"command": "exact", "spec": spec, "k": n_eigenvalues, "method": method}
        emitter = Emitter(output, config, seed)
        chosen = method
        if chosen == "auto":
            chosen = "dense" if problem.n_qubits <= DENSE_MAX_QUBITS else "lanczos"
        if chosen == "dense":
            result = dense_ground_energy(problem.hamiltonian, n_eigenvalues)
        else:
            if problem.n_qubits > LANCZOS_MAX_QUBITS:
                raise CapacityError(f"{problem.n_qubits} qubits exceed the Lanczos budget")
            result = lanczos_ground_energy(problem.hamiltonian, n_eigenvalues, seed=seed)
        emitter.emit("spectrum", {
            "spec": spec,
            "method": result.method,
            "eigenvalues": result.eigenvalues,
            "per_spin": [v / problem.n_qubits for v in result.eigenvalues],
            "residual_norms": result.residual_norms,
        })
        emitter.close()

    _run(body)


@main.command("runtime-estimate")
@click.option("--spec", default=None, help="Derive gate counts from this problem spec.")
@click.option("--ansatz", "ansatz_spec", default=None)
@click.option("--cycles", type=int, default=0, show_default=True,
              help="Evolution cycles (each appends one ansatz layer).")
@click.option("--n1q", type=int, default=None, help="Explicit sequential 1q gate count.")
@click.option("--n2q", type=int, default=None, help="Explicit sequential 2q gate count.")
@click.option("--groups", type=int, default=None,
              help="Defaults to the measurement grouping of the spec (or 3).")
@click.option("--shots", type=int, default=8192, show_default=True)
@click.option("--evals", type=int, default=1, show_default=True)
@click.option("--profile", type=click.Choice(sorted(PROFILES)), default="superconducting",
              show_default=True)
@_common_options
def cmd_runtime_estimate(spec, ansatz_spec, cycles, n1q, n2q, groups, shots,
                         evals, profile, seed, output, plot_dir):
    """Project device wall time from gate counts x groups x shots x evals."""

    def body():
        n_groups = groups
        if spec is not None:
            problem = parse_problem(spec)
            ansatz_name = ansatz_spec or _default_ansatz_for(problem)
            ansatz = parse_ansatz_spec(ansatz_name, problem.n_qubits)
            from .ansatz import Circuit, lower_to_circuit

            circuit = Circuit(problem.n_qubits)
            # State preparation, the (deep) circuit, and the worst-case
            # measurement basis change all sit on the critical path.
            for qubit, bit in enumerate(problem.start_bits):
                if bit == "1":
                    circuit.gates.append(Gate("X", (qubit,)))
            layer = lower_to_circuit(ansatz, np.zeros(ansatz.n_params))
            for _ in range(cycles + 1):
                circuit.gates.extend(layer.gates)
            for qubit in range(problem.n_qubits):
                circuit.gates.append(Gate("Sdg", (qubit,)))
                circuit.gates.append(Gate("H", (qubit,)))
            count_1q, count_2q = sequential_gate_depth(circuit)
            if n_groups is None:
                n_groups = len(group_terms(problem.hamiltonian))
        elif n1q is None or n2q is None:
            raise ValueError("provide either --spec or both --n1q and --n2q")
        else:
            count_1q, count_2q = n1q, n2q
        if n_groups is None:
            n_groups = 3
        estimate = build_runtime_estimate(
            count_1q, count_2q, PROFILES[profile], n_groups, shots, evals
        )
        config = {
            "command": "runtime-estimate", "spec": spec, "ansatz": ansatz_spec,
            "cycles": cycles, "n1q": n1q, "n2q": n2q, "groups": groups,
            "shots": shots, "evals": evals, "profile": profile,
        }
        emitter = Emitter(output, config, seed)
        emitter.emit("runtime", {
            "n_1q_sequential": estimate.n_1q_sequential,
            "n_2q_sequential": estimate.n_2q_sequential,
            "groups": estimate.groups,
            "shots": estimate.shots,
            "seconds_per_evaluation": estimate.seconds_per_evaluation,
            "n_evaluations": estimate.n_evaluations,
            "total_seconds": estimate.total_seconds,
            "total_days": estimate.total_days,
        })
        emitter.close()

    _run(body)


if __name__ == "__main__":
    main()
