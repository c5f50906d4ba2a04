"""Surrogate convergence model for iterative variational jobs.

Each iteration on backend ``B`` moves the running energy a fixed fraction of the
way toward that backend's floor::

    E <- floor(B) + (E - floor(B)) * exp(-1 / tau(B))

The floor sits above the reference by ``|ref| * floor_kappa * noise_index(B)``,
so noisier backends plateau at worse energies. Energy carries across segment
boundaries, which is what makes a noisy first stage useful to a clean tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .domain import BackendProfile, JobSpec, ZeroReference
from .fidelity import job_score, noise_index

DEFAULT_TOL_FRACTION = 0.05


class EmptySegments(ValueError):
    pass


class BudgetExceeded(ValueError):
    pass


class EmptyTrajectory(ValueError):
    pass


class TailOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class ConvergenceModel:
    e_start: float = 0.0
    tau: float = 10.0
    floor_kappa: float = 1.0
    # tau(B) = tau * (1 + noise_index(B)) when set
    scale_tau_by_noise: bool = False
    jitter: bool = False
    jitter_scale: float = 0.02

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.floor_kappa < 0:
            raise ValueError("floor_kappa must be nonnegative")

    def tau_for(self, backend: BackendProfile) -> float:
        if self.scale_tau_by_noise:
            return self.tau * (1.0 + noise_index(backend))
        return self.tau


@dataclass
class Trajectory:
    energies: list[float] = field(default_factory=list)
    backend_ids: list[int] = field(default_factory=list)
    segment_boundaries: list[int] = field(default_factory=list)
    jitters: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.energies)

    @property
    def final_energy(self) -> float:
        if not self.energies:
            raise EmptyTrajectory("trajectory has no iterations")
        return self.energies[-1]

    def rows(self) -> list[tuple[int, int, float]]:
        """(iteration, backend_id, energy) with 1-based iterations."""
        return [(i + 1, b, e) for i, (b, e) in enumerate(zip(self.backend_ids, self.energies))]


def energy_floor(backend: BackendProfile, reference: float, floor_kappa: float = 1.0) -> float:
    if reference == 0:
        raise ZeroReference("energy floor needs a nonzero reference")
    return reference + abs(reference) * floor_kappa * noise_index(backend)


def run_segments(
    job: JobSpec,
    segments: Sequence[tuple[BackendProfile, int]],
    model: ConvergenceModel = ConvergenceModel(),
    seed: int = 0,
) -> Trajectory:
    """Run the job's iterations segment by segment, warm-starting each from the last."""
    if not segments:
        raise EmptySegments("at least one segment is required")
    counts = [count for _, count in segments]
    if any(int(c) != c or c < 1 for c in counts):
        raise ValueError(f"segment iteration counts must be positive integers, got {counts}")
    if sum(counts) > job.total_iterations:
        raise BudgetExceeded(f"segments use {sum(counts)} of {job.total_iterations} iterations")

    rng = np.random.default_rng(seed) if model.jitter else None
    ref = job.reference_value
    energy = model.e_start
    traj = Trajectory()
    for backend, count in segments:
        if traj.backend_ids and traj.backend_ids[-1] != backend.id:
            traj.segment_boundaries.append(len(traj.energies))
        floor = energy_floor(backend, ref, model.floor_kappa)
        decay = math.exp(-1.0 / model.tau_for(backend))
        amplitude = model.jitter_scale * abs(ref) * noise_index(backend)
        for _ in range(count):
            energy = floor + (energy - floor) * decay
            noise = float(rng.uniform(-amplitude, amplitude)) if rng is not None else 0.0
            energy += noise
            traj.energies.append(energy)
            traj.backend_ids.append(backend.id)
            traj.jitters.append(noise)
    return traj


def final_score(trajectory: Trajectory, reference: float) -> float:
    return job_score(reference, trajectory.final_energy)


def iterations_to_converge(
    energies: Sequence[float] | Trajectory, target: float, tol: float
) -> Optional[int]:
    """First 1-based iteration within ``tol`` of ``target``; None if never reached."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    if isinstance(energies, Trajectory):
        energies = energies.energies
    for i, e in enumerate(energies, start=1):
        if abs(e - target) <= tol:
            return i
    return None


def split_run(
    job: JobSpec,
    noisy: BackendProfile,
    clean: BackendProfile,
    tail: int,
    model: ConvergenceModel = ConvergenceModel(),
    seed: int = 0,
) -> Trajectory:
    """Noisy head of ``total - tail`` iterations, then a clean tail of ``tail``."""
    total = job.total_iterations
    if not (0 <= tail <= total):
        raise TailOutOfRange(f"tail {tail} outside [0, {total}]")
    segments = []
    if total - tail:
        segments.append((noisy, total - tail))
    if tail:
        segments.append((clean, tail))
    return run_segments(job, segments, model, seed)


def tail_sweep(
    job: JobSpec,
    noisy: BackendProfile,
    clean: BackendProfile,
    tail_lengths: Sequence[int],
    model: ConvergenceModel = ConvergenceModel(),
    seed: int = 0,
) -> list[tuple[int, float]]:
    for t in tail_lengths:
        if not (0 <= t <= job.total_iterations):
            raise TailOutOfRange(f"tail {t} outside [0, {job.total_iterations}]")
    return [
        (t, final_score(split_run(job, noisy, clean, t, model, seed), job.reference_value))
        for t in tail_lengths
    ]
