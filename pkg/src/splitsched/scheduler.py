"""Mapping options, timeline simulation, solution metrics and baselines.

Each backend is a single-capacity FIFO server. Whole jobs and stage-1 pieces are
released at time zero; a stage-2 piece is released when its stage 1 finishes
(plus an optional switch overhead). A free backend always starts the released
piece with the smallest ``(release time, job id)``. No preemption.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .domain import (
    BackendProfile,
    JobSpec,
    MappingOption,
    MissingScore,
    ScheduleStrategy,
    SolutionMetrics,
    Single,
    Split,
    StrategyError,
    canonical_pair,
    split_iterations,
    validate_strategy,
)

InvalidStrategy = StrategyError
BRUTE_FORCE_CAP = 10**6


class ZeroMakespan(ValueError):
    pass


class SpaceTooLarge(ValueError):
    def __init__(self, size: int, cap: int):
        super().__init__(f"design space has {size} strategies, above the cap of {cap}")
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class TimelineEvent:
    job_id: int
    stage: int
    backend_id: int
    start: float
    finish: float


@dataclass(frozen=True)
class ParetoPoint:
    strategy: ScheduleStrategy
    metrics: SolutionMetrics


def enumerate_mapping_options(backends: Sequence[BackendProfile]) -> list[MappingOption]:
    """Singles in id order, then every unordered pair (lexicographic by id), noisier first."""
    if not backends:
        raise ValueError("no backends to map onto")
    ordered = sorted(backends, key=lambda b: b.id)
    options: list[MappingOption] = [Single(b.id) for b in ordered]
    options.extend(canonical_pair(a, b) for a, b in itertools.combinations(ordered, 2))
    return options


def simulate_timeline(
    jobs: Sequence[JobSpec],
    strategy: ScheduleStrategy,
    backends: Sequence[BackendProfile],
    switch_overhead: float = 0.0,
    validate: bool = True,
) -> tuple[list[TimelineEvent], float]:
    if validate:
        validate_strategy(strategy, jobs, backends)
    iter_time = {b.id: b.iter_time for b in backends}
    order = sorted(iter_time)
    # per-backend heap of (release, job_id, stage, duration, follow-up)
    pending: dict[int, list] = {bid: [] for bid in order}
    for job, option in zip(jobs, strategy.assignments):
        if isinstance(option, Single):
            duration = job.total_iterations * iter_time[option.backend_id]
            heapq.heappush(pending[option.backend_id], (0.0, job.id, 1, duration, None))
        else:
            n1, n2 = split_iterations(job, strategy.split_ratio)
            follow = (option.stage2_backend_id, n2 * iter_time[option.stage2_backend_id])
            duration = n1 * iter_time[option.stage1_backend_id]
            heapq.heappush(pending[option.stage1_backend_id], (0.0, job.id, 1, duration, follow))

    # wake-ups (time, backend_id): a backend is revisited only when it frees up
    # or a piece is released to it. Ties resolve in backend id order.
    free_at = dict.fromkeys(order, 0.0)
    wakes = [(0.0, bid) for bid in order if pending[bid]]
    events: list[TimelineEvent] = []
    while wakes:
        now, bid = heapq.heappop(wakes)
        queue = pending[bid]
        if free_at[bid] > now or not queue or queue[0][0] > now:
            continue
        _, job_id, stage, duration, follow = heapq.heappop(queue)
        finish = now + duration
        events.append(TimelineEvent(job_id, stage, bid, now, finish))
        free_at[bid] = finish
        if queue:
            heapq.heappush(wakes, (max(finish, queue[0][0]), bid))
        if follow is not None:
            next_bid, next_duration = follow
            release = finish + switch_overhead
            heapq.heappush(pending[next_bid], (release, job_id, 2, next_duration, None))
            heapq.heappush(wakes, (max(release, free_at[next_bid]), next_bid))
    makespan = max((e.finish for e in events), default=0.0)
    return events, makespan


def throughput(job_count: int, makespan: float) -> float:
    if not makespan > 0:
        raise ZeroMakespan("throughput needs a positive makespan")
    return job_count / makespan


def _scores(backends: Sequence[BackendProfile]) -> dict[int, float]:
    return {b.id: b.require_score() for b in backends}


def job_fidelity(option: MappingOption, backends: Sequence[BackendProfile] | dict[int, float]) -> float:
    """Score of the backend that finishes the job: the cleaner one for a split."""
    scores = backends if isinstance(backends, dict) else _scores(backends)
    try:
        return max(scores[bid] for bid in option.backend_ids)
    except KeyError as exc:
        raise MissingScore(f"no score for backend {exc.args[0]}") from None


def average_fidelity(
    strategy: ScheduleStrategy,
    jobs: Sequence[JobSpec],
    backends: Sequence[BackendProfile],
) -> float:
    scores = _scores(backends)
    # fsum keeps the mean independent of job order
    return math.fsum(job_fidelity(o, scores) for o in strategy.assignments) / len(jobs)


def makespan_lower_bound(jobs: Sequence[JobSpec], backends: Sequence[BackendProfile]) -> float:
    if not jobs or not backends:
        raise ValueError("lower bound needs at least one job and one backend")
    fastest = min(b.iter_time for b in backends)
    longest = max(j.total_iterations for j in jobs) * fastest
    work = sum(j.total_iterations for j in jobs)
    capacity = sum(1.0 / b.iter_time for b in backends)
    return max(longest, work / capacity)


def method1_strategy(
    jobs: Sequence[JobSpec], backends: Sequence[BackendProfile], split_ratio: float = 0.5
) -> ScheduleStrategy:
    """Every job on the single best-scoring backend."""
    best = min(backends, key=lambda b: (-b.require_score(), b.id))
    return ScheduleStrategy(tuple(Single(best.id) for _ in jobs), split_ratio)


def method2_strategy(
    jobs: Sequence[JobSpec], backends: Sequence[BackendProfile], split_ratio: float = 0.5
) -> ScheduleStrategy:
    """Round robin over backends in descending score order."""
    ranked = sorted(backends, key=lambda b: (-b.require_score(), b.id))
    return ScheduleStrategy(
        tuple(Single(ranked[i % len(ranked)].id) for i in range(len(jobs))), split_ratio
    )


def check_weights(weights: Sequence[float]) -> tuple[float, float]:
    w1, w2 = weights
    if w1 < 0 or w2 < 0 or not math.isclose(w1 + w2, 1.0, abs_tol=1e-9):
        raise ValueError(f"weights must be nonnegative and sum to 1, got {weights!r}")
    return float(w1), float(w2)


def evaluate(
    strategy: ScheduleStrategy,
    jobs: Sequence[JobSpec],
    backends: Sequence[BackendProfile],
    weights: Sequence[float] = (0.5, 0.5),
    lower_bound: Optional[float] = None,
    validate: bool = True,
) -> SolutionMetrics:
    """Makespan, throughput, fidelity and ``w1 * TH/TH_ub + w2 * FI``.

    ``TH_ub`` is the job count over the makespan lower bound, so the throughput
    term lies in (0, 1].
    """
    w1, w2 = check_weights(weights)
    _, makespan = simulate_timeline(jobs, strategy, backends, validate=validate)
    th = throughput(len(jobs), makespan)
    lb = makespan_lower_bound(jobs, backends) if lower_bound is None else lower_bound
    th_norm = th / throughput(len(jobs), lb)
    fi = average_fidelity(strategy, jobs, backends)
    return SolutionMetrics(makespan, th, fi, w1 * th_norm + w2 * fi, th_norm)


def dominates(a: SolutionMetrics, b: SolutionMetrics) -> bool:
    """Pareto dominance on (throughput, fidelity), both maximized."""
    return (
        a.throughput >= b.throughput
        and a.fidelity >= b.fidelity
        and (a.throughput > b.throughput or a.fidelity > b.fidelity)
    )


def pareto_mask(metrics: Sequence[SolutionMetrics]) -> list[bool]:
    """True where the point is not dominated by any other; O(n log n) sweep."""
    order = sorted(range(len(metrics)), key=lambda i: -metrics[i].throughput)
    mask = [False] * len(metrics)
    best_before = -math.inf
    for _, group in itertools.groupby(order, key=lambda i: metrics[i].throughput):
        group = list(group)
        group_best = max(metrics[i].fidelity for i in group)
        for i in group:
            fi = metrics[i].fidelity
            mask[i] = fi > best_before and fi >= group_best
        best_before = max(best_before, group_best)
    return mask


@dataclass
class DesignSpace:
    points: list[ParetoPoint]
    pareto: list[bool]
    best_index: int

    @property
    def frontier(self) -> list[ParetoPoint]:
        return [p for p, keep in zip(self.points, self.pareto) if keep]

    @property
    def best(self) -> ParetoPoint:
        return self.points[self.best_index]


def iter_strategies(
    job_count: int, options: Sequence[MappingOption], split_ratio: float
) -> Iterator[ScheduleStrategy]:
    for combo in itertools.product(options, repeat=job_count):
        yield ScheduleStrategy(combo, split_ratio)


def brute_force_frontier(
    jobs: Sequence[JobSpec],
    backends: Sequence[BackendProfile],
    split_ratio: float = 0.5,
    weights: Sequence[float] = (0.5, 0.5),
    cap: int = BRUTE_FORCE_CAP,
) -> DesignSpace:
    """Evaluate every assignment vector; mark the Pareto set and the max-fitness point."""
    options = enumerate_mapping_options(backends)
    size = len(options) ** len(jobs)
    if size > cap:
        raise SpaceTooLarge(size, cap)
    lb = makespan_lower_bound(jobs, backends)
    points = []
    for strategy in iter_strategies(len(jobs), options, split_ratio):
        points.append(ParetoPoint(strategy, evaluate(strategy, jobs, backends, weights, lb)))
    metrics = [p.metrics for p in points]
    best = max(range(len(points)), key=lambda i: (metrics[i].fitness, -i))
    return DesignSpace(points, pareto_mask(metrics), best)


def deviation_distribution(
    strategy: ScheduleStrategy,
    jobs: Sequence[JobSpec],
    backends: Sequence[BackendProfile],
) -> list[float]:
    """Per job, the best backend score minus the job's achieved fidelity."""
    scores = _scores(backends)
    best = max(scores.values())
    return [best - job_fidelity(o, scores) for o in strategy.assignments[: len(jobs)]]
