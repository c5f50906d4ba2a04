"""Genetic search over per-job mapping options.

A genome holds one option index per job. Each generation keeps the top
``elite_size`` genomes, breeds ``population_size - elite_size`` offspring
(roulette selection, single-point crossover, per-gene mutation) and replaces
every non-elite with them. Selection and variation draw from one seeded stream,
so the result does not depend on how fitness evaluation is parallelized.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence, Union

import numpy as np

from .domain import BackendProfile, JobSpec, MappingOption, ScheduleStrategy, SolutionMetrics
from .scheduler import enumerate_mapping_options, evaluate, makespan_lower_bound

log = logging.getLogger(__name__)

Weights = Union[tuple[float, float], str]
DYNAMIC_PIVOT = 20


class EmptyOptions(ValueError):
    pass


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 10
    generations: int = 100
    mutation_rate: float = 0.2
    elite_size: int = 2
    seed: int = 0
    weights: Weights = (0.5, 0.5)
    pivot: int = DYNAMIC_PIVOT

    def __post_init__(self) -> None:
        if self.population_size < 1:
            raise ValueError("population_size must be positive")
        if self.generations < 0:
            raise ValueError("generations must be nonnegative")
        if not (0.0 <= self.mutation_rate <= 1.0):
            raise ValueError("mutation_rate must lie in [0, 1]")
        if not (0 <= self.elite_size < self.population_size):
            raise ValueError("elite_size must satisfy 0 <= E < N")
        if isinstance(self.weights, str) and self.weights != "dynamic":
            raise ValueError(f"unknown weight policy {self.weights!r}")

    def resolve_weights(self, job_count: int) -> tuple[float, float]:
        if self.weights == "dynamic":
            return dynamic_weights(job_count, self.pivot)
        return tuple(self.weights)


@dataclass
class Individual:
    genes: tuple[int, ...]
    fitness: Optional[float] = None


@dataclass
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float


@dataclass
class EvolutionResult:
    strategy: ScheduleStrategy
    genes: tuple[int, ...]
    metrics: SolutionMetrics
    weights: tuple[float, float]
    history: list[GenerationStats] = field(default_factory=list)
    evaluations: int = 0

    @property
    def fitness(self) -> float:
        return self.metrics.fitness


def dynamic_weights(job_count: int, pivot: int = DYNAMIC_PIVOT) -> tuple[float, float]:
    """Throughput weight ``n / (n + pivot)``; grows toward 1 as the workload grows."""
    if job_count < 1:
        raise ValueError("job_count must be at least 1")
    w1 = job_count / (job_count + pivot)
    return w1, 1.0 - w1


def initialize_population(
    config: GaConfig, job_count: int, n_options: int, rng
) -> list[Individual]:
    if n_options < 1:
        raise EmptyOptions("no mapping options to draw genes from")
    rng = np.random.default_rng(rng)
    draws = rng.integers(0, n_options, size=(config.population_size, job_count))
    return [Individual(tuple(int(g) for g in row)) for row in draws]


def roulette_select(fitnesses: Sequence[float], count: int, rng) -> list[int]:
    """Indices drawn with replacement, proportional to fitness."""
    rng = np.random.default_rng(rng)
    weights = np.asarray(fitnesses, dtype=float)
    if np.any(weights < 0):
        raise ValueError("roulette selection needs nonnegative fitness")
    total = weights.sum()
    if total <= 0:
        log.warning("all fitness values are zero; selecting uniformly")
        return [int(i) for i in rng.integers(0, len(weights), size=count)]
    cumulative = np.cumsum(weights / total)
    spins = rng.random(count)
    picks = np.searchsorted(cumulative, spins, side="right")
    return [int(min(i, len(weights) - 1)) for i in picks]


def crossover(
    parent_a: Sequence[int], parent_b: Sequence[int], rng, cut: Optional[int] = None
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Single-point crossover; the cut falls in ``[1, len - 1]``."""
    if len(parent_a) != len(parent_b):
        raise ValueError(f"parents differ in length: {len(parent_a)} vs {len(parent_b)}")
    a, b = tuple(parent_a), tuple(parent_b)
    if len(a) < 2:
        return a, b
    if cut is None:
        cut = int(np.random.default_rng(rng).integers(1, len(a)))
    return a[:cut] + b[cut:], b[:cut] + a[cut:]


def mutation_mask(length: int, rate: float, rng) -> np.ndarray:
    return np.random.default_rng(rng).random(length) < rate


def mutate(genes: Sequence[int], rate: float, n_options: int, rng) -> tuple[int, ...]:
    """Resample each gene uniformly with probability ``rate``."""
    if not (0.0 <= rate <= 1.0):
        raise ValueError("mutation rate must lie in [0, 1]")
    rng = np.random.default_rng(rng)
    mask = mutation_mask(len(genes), rate, rng)
    out = list(genes)
    for pos in np.flatnonzero(mask):
        out[pos] = int(rng.integers(0, n_options))
    return tuple(out)


def decode(genes: Sequence[int], options: Sequence[MappingOption], split_ratio: float) -> ScheduleStrategy:
    return ScheduleStrategy(tuple(options[g] for g in genes), split_ratio)


def _score_genes(
    genes: tuple[int, ...],
    options: Sequence[MappingOption],
    split_ratio: float,
    jobs: Sequence[JobSpec],
    backends: Sequence[BackendProfile],
    weights: tuple[float, float],
    lower_bound: float,
) -> SolutionMetrics:
    strategy = decode(genes, options, split_ratio)
    return evaluate(strategy, jobs, backends, weights, lower_bound)


class _Evaluator:
    """Fitness cache keyed by genome, optionally fanned out to worker processes."""

    def __init__(self, score, workers: int = 1):
        self.score = score
        self.cache: dict[tuple[int, ...], SolutionMetrics] = {}
        self.pool = ProcessPoolExecutor(workers) if workers > 1 else None

    def __call__(self, population: Sequence[Individual]) -> None:
        missing = list(dict.fromkeys(p.genes for p in population if p.genes not in self.cache))
        if self.pool is not None and len(missing) > 1:
            results = list(self.pool.map(self.score, missing))
        else:
            results = [self.score(g) for g in missing]
        self.cache.update(zip(missing, results))
        for p in population:
            p.fitness = self.cache[p.genes].fitness

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()


def _stats(generation: int, population: Sequence[Individual]) -> GenerationStats:
    values = [p.fitness for p in population]
    return GenerationStats(generation, max(values), float(np.mean(values)))


def evolve(
    config: GaConfig,
    jobs: Sequence[JobSpec],
    backends: Sequence[BackendProfile],
    split_ratio: float = 0.5,
    workers: int = 1,
) -> EvolutionResult:
    options = enumerate_mapping_options(backends)
    weights = config.resolve_weights(len(jobs))
    score = partial(
        _score_genes,
        options=options,
        split_ratio=split_ratio,
        jobs=tuple(jobs),
        backends=tuple(backends),
        weights=weights,
        lower_bound=makespan_lower_bound(jobs, backends),
    )
    rng = np.random.default_rng(config.seed)
    evaluator = _Evaluator(score, workers)
    try:
        population = initialize_population(config, len(jobs), len(options), rng)
        evaluator(population)
        history = [_stats(0, population)]
        n_offspring = config.population_size - config.elite_size
        for generation in range(1, config.generations + 1):
            ranked = sorted(population, key=lambda p: -p.fitness)
            elites = [Individual(p.genes, p.fitness) for p in ranked[: config.elite_size]]
            parents = roulette_select([p.fitness for p in population], n_offspring + n_offspring % 2, rng)
            offspring: list[Individual] = []
            for a, b in zip(parents[::2], parents[1::2]):
                for child in crossover(population[a].genes, population[b].genes, rng):
                    offspring.append(Individual(mutate(child, config.mutation_rate, len(options), rng)))
            offspring = offspring[:n_offspring]
            evaluator(offspring)
            population = elites + offspring
            history.append(_stats(generation, population))
    finally:
        evaluator.close()

    best = max(population, key=lambda p: p.fitness)
    return EvolutionResult(
        strategy=decode(best.genes, options, split_ratio),
        genes=best.genes,
        metrics=evaluator.cache[best.genes],
        weights=weights,
        history=history,
        evaluations=len(evaluator.cache),
    )
