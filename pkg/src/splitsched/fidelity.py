"""Proxy fidelity scores for jobs and backends.

A job's score is ``|ref| / (|ref| + |measured - ref|)``; a backend's score is the
mean job score over a small benchmark suite. Hardware benchmark runs are replaced
by a seeded surrogate whose deviation grows with the backend's aggregate error.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import BackendProfile, MissingScore, ZeroReference

log = logging.getLogger(__name__)

NOISE_WEIGHTS = (1.0, 10.0, 5.0)
BENCH_KAPPA = 3.0
BENCH_ETA = 0.1
SUITE_SIZE = 5


class EmptyBenchmarkSet(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkResult:
    job_id: int
    backend_id: int
    reference_value: float
    measured_value: float
    deviation: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "deviation", abs(self.measured_value - self.reference_value))

    @property
    def score(self) -> float:
        return job_score(self.reference_value, self.measured_value)


def job_score(reference: float, measured: float) -> float:
    if reference == 0:
        raise ZeroReference("job score is undefined for a zero reference")
    ref = abs(reference)
    return ref / (ref + abs(measured - reference))


def backend_score(results: Sequence[BenchmarkResult]) -> float:
    if not results:
        raise EmptyBenchmarkSet("cannot score a backend without benchmark results")
    backend_ids = {r.backend_id for r in results}
    if len(backend_ids) != 1:
        raise ValueError(f"results span several backends: {sorted(backend_ids)}")
    return float(np.mean([r.score for r in results]))


def noise_index(backend: BackendProfile, weights: Sequence[float] = NOISE_WEIGHTS) -> float:
    """Weighted sum of the three error rates; two-qubit error dominates by default."""
    w1q, w2q, wro = weights
    return w1q * backend.one_q_error + w2q * backend.two_q_error + wro * backend.readout_error


def simulate_benchmark_execution(
    backend: BackendProfile,
    reference: float,
    circuit_weight: float,
    seed: int,
    kappa: float = BENCH_KAPPA,
    eta_amplitude: float = BENCH_ETA,
    weights: Sequence[float] = NOISE_WEIGHTS,
) -> float:
    """Surrogate measured value of one benchmark circuit on ``backend``.

    The estimate is pulled toward zero by ``kappa * noise * weight * (1 + eta)``
    of the reference, with ``eta`` uniform in ``[-eta_amplitude, eta_amplitude]``.
    """
    if reference == 0:
        raise ZeroReference("benchmark reference must be nonzero")
    if not circuit_weight > 0:
        raise ValueError("circuit_weight must be positive")
    eta = np.random.default_rng(seed).uniform(-eta_amplitude, eta_amplitude) if eta_amplitude else 0.0
    shrink = kappa * noise_index(backend, weights) * circuit_weight * (1.0 + eta)
    return reference * (1.0 - shrink)


@dataclass(frozen=True)
class BenchmarkCircuit:
    job_id: int
    reference_value: float
    weight: float
    seed: int


def benchmark_suite(size: int = SUITE_SIZE, seed: int = 0) -> list[BenchmarkCircuit]:
    """Random benchmark circuits, shared across backends so per-circuit orderings hold."""
    if size < 1:
        raise EmptyBenchmarkSet("benchmark suite needs at least one circuit")
    rng = np.random.default_rng(seed)
    refs = rng.uniform(-2.5, -0.5, size)
    weights = rng.uniform(0.1, 0.3, size)
    seeds = rng.integers(0, 2**31 - 1, size)
    return [
        BenchmarkCircuit(i, float(refs[i]), float(weights[i]), int(seeds[i]))
        for i in range(size)
    ]


def run_benchmarks(
    backend: BackendProfile,
    suite: Sequence[BenchmarkCircuit],
    kappa: float = BENCH_KAPPA,
    eta_amplitude: float = BENCH_ETA,
) -> list[BenchmarkResult]:
    return [
        BenchmarkResult(
            c.job_id,
            backend.id,
            c.reference_value,
            simulate_benchmark_execution(
                backend, c.reference_value, c.weight, c.seed, kappa, eta_amplitude
            ),
        )
        for c in suite
    ]


def score_backends(
    backends: Sequence[BackendProfile],
    suite_size: int = SUITE_SIZE,
    seed: int = 0,
    kappa: float = BENCH_KAPPA,
    eta_amplitude: float = BENCH_ETA,
) -> tuple[list[BackendProfile], list[BenchmarkResult]]:
    """Score every backend on one shared benchmark suite."""
    suite = benchmark_suite(suite_size, seed)
    scored, results = [], []
    for backend in backends:
        rows = run_benchmarks(backend, suite, kappa, eta_amplitude)
        results.extend(rows)
        scored.append(backend.with_score(backend_score(rows)))
        log.debug("backend %s scored %.4f", backend.name, scored[-1].score)
    return scored, results


def rank_backends(backends: Sequence[BackendProfile]) -> list[BackendProfile]:
    """Best score first; ties go to the lower id."""
    for b in backends:
        if b.score is None:
            raise MissingScore(f"backend {b.id} ({b.name}) has no score")
    return sorted(backends, key=lambda b: (-b.score, b.id))
