"""Value types shared across the scheduler: backends, jobs, mappings, strategies."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union


class StrategyError(ValueError):
    """A schedule strategy violates one of its structural invariants."""


class UnknownBackend(StrategyError):
    pass


class LengthMismatch(StrategyError):
    pass


class SplitSameBackend(StrategyError):
    pass


class SplitOrderViolation(StrategyError):
    pass


class RatioOutOfRange(StrategyError):
    pass


class MissingScore(ValueError):
    """A backend score was required but the profile has not been scored."""


class ZeroReference(ValueError):
    """Score math is undefined for a reference value of exactly zero."""


def _check_probability(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class BackendProfile:
    id: int
    name: str
    one_q_error: float
    two_q_error: float
    readout_error: float
    iter_time: float = 1.0
    score: Optional[float] = None

    def __post_init__(self) -> None:
        _check_probability("one_q_error", self.one_q_error)
        _check_probability("two_q_error", self.two_q_error)
        _check_probability("readout_error", self.readout_error)
        if not self.iter_time > 0:
            raise ValueError(f"iter_time must be positive, got {self.iter_time!r}")
        if self.score is not None and not (0.0 < self.score <= 1.0):
            raise ValueError(f"score must lie in (0, 1], got {self.score!r}")

    def with_score(self, score: float) -> "BackendProfile":
        return replace(self, score=score)

    def require_score(self) -> float:
        if self.score is None:
            raise MissingScore(f"backend {self.id} ({self.name}) has no score")
        return self.score


@dataclass(frozen=True)
class JobSpec:
    id: int
    total_iterations: int = 150
    reference_value: float = -1.86

    def __post_init__(self) -> None:
        if int(self.total_iterations) != self.total_iterations or self.total_iterations < 1:
            raise ValueError(f"total_iterations must be a positive integer, got {self.total_iterations!r}")
        if self.reference_value == 0 or not math.isfinite(self.reference_value):
            raise ZeroReference(f"job {self.id}: reference_value must be finite and nonzero")


@dataclass(frozen=True)
class Single:
    """Whole job on one backend."""

    backend_id: int

    @property
    def backend_ids(self) -> tuple[int, ...]:
        return (self.backend_id,)

    def label(self, names: Optional[dict[int, str]] = None) -> str:
        return _name(self.backend_id, names)


@dataclass(frozen=True)
class Split:
    """Stage 1 on the noisier backend, stage 2 on the cleaner one."""

    stage1_backend_id: int
    stage2_backend_id: int

    @property
    def backend_ids(self) -> tuple[int, ...]:
        return (self.stage1_backend_id, self.stage2_backend_id)

    def label(self, names: Optional[dict[int, str]] = None) -> str:
        return f"split_{_name(self.stage1_backend_id, names)}{_name(self.stage2_backend_id, names)}"


MappingOption = Union[Single, Split]


def _name(backend_id: int, names: Optional[dict[int, str]]) -> str:
    if names and backend_id in names:
        return names[backend_id]
    return f"B{backend_id}"


def canonical_pair(a: BackendProfile, b: BackendProfile) -> Split:
    """Order a backend pair noisier-first; equal scores fall back to ascending id."""
    key_a = (a.require_score(), a.id)
    key_b = (b.require_score(), b.id)
    lo, hi = (a, b) if key_a <= key_b else (b, a)
    return Split(lo.id, hi.id)


@dataclass(frozen=True)
class ScheduleStrategy:
    assignments: tuple[MappingOption, ...]
    split_ratio: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", tuple(self.assignments))

    def __len__(self) -> int:
        return len(self.assignments)

    def encode(self, names: Optional[dict[int, str]] = None) -> str:
        return "|".join(option.label(names) for option in self.assignments)


@dataclass(frozen=True)
class SolutionMetrics:
    makespan: float
    throughput: float
    fidelity: float
    fitness: float
    throughput_norm: float = 0.0


def validate_strategy(
    strategy: ScheduleStrategy,
    jobs: Sequence[JobSpec],
    backends: Sequence[BackendProfile],
) -> ScheduleStrategy:
    """Return ``strategy`` unchanged, or raise the first invariant it breaks."""
    if len(strategy.assignments) != len(jobs):
        raise LengthMismatch(
            f"{len(strategy.assignments)} assignments for {len(jobs)} jobs"
        )
    if not (0.0 < strategy.split_ratio < 1.0):
        raise RatioOutOfRange(f"split ratio {strategy.split_ratio!r} outside (0, 1)")

    by_id = {b.id: b for b in backends}
    for job_index, option in enumerate(strategy.assignments):
        for backend_id in option.backend_ids:
            if backend_id not in by_id:
                raise UnknownBackend(f"job {job_index}: backend {backend_id} does not exist")
        if isinstance(option, Split):
            first = by_id[option.stage1_backend_id]
            second = by_id[option.stage2_backend_id]
            if first.id == second.id:
                raise SplitSameBackend(f"job {job_index}: split uses backend {first.id} twice")
            if canonical_pair(first, second) != option:
                raise SplitOrderViolation(
                    f"job {job_index}: stage 1 on {first.id} is not noisier than stage 2 on {second.id}"
                )
            if jobs[job_index].total_iterations < 2:
                raise StrategyError(f"job {job_index} is too short to split")
    return strategy


def split_iterations(job: JobSpec, ratio: float) -> tuple[int, int]:
    """Stage-1 and stage-2 iteration counts for ``ratio`` of the job in the tail.

    Rounds half up, then clamps so both stages get at least one iteration.
    """
    total = job.total_iterations
    if not (0.0 < ratio < 1.0):
        raise RatioOutOfRange(f"split ratio {ratio!r} outside (0, 1)")
    if total < 2:
        raise ValueError(f"job {job.id} has {total} iteration(s); a split needs at least 2")
    stage2 = math.floor(ratio * total + 0.5)
    stage2 = min(max(stage2, 1), total - 1)
    return total - stage2, stage2
