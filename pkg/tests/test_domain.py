import pytest
from hypothesis import given, strategies as st

from splitsched.domain import (
    BackendProfile,
    JobSpec,
    LengthMismatch,
    RatioOutOfRange,
    ScheduleStrategy,
    Single,
    Split,
    SplitOrderViolation,
    SplitSameBackend,
    StrategyError,
    UnknownBackend,
    ZeroReference,
    split_iterations,
    validate_strategy,
)


def test_fig5_strategy_is_valid(fig5_strategy, five_jobs, scored_backends):
    assert validate_strategy(fig5_strategy, five_jobs, scored_backends) is fig5_strategy


def test_length_mismatch(fig5_strategy, five_jobs, scored_backends):
    short = ScheduleStrategy(fig5_strategy.assignments[:4], 0.5)
    with pytest.raises(LengthMismatch):
        validate_strategy(short, five_jobs, scored_backends)


def test_split_order_violation(five_jobs, scored_backends):
    bad = ScheduleStrategy((Split(2, 0),) + (Single(0),) * 4, 0.5)
    with pytest.raises(SplitOrderViolation):
        validate_strategy(bad, five_jobs, scored_backends)


@pytest.mark.parametrize(
    "option, ratio, error",
    [
        (Single(7), 0.5, UnknownBackend),
        (Split(1, 1), 0.5, SplitSameBackend),
        (Single(0), 0.0, RatioOutOfRange),
        (Single(0), 1.0, RatioOutOfRange),
    ],
)
def test_validation_errors(option, ratio, error, scored_backends):
    with pytest.raises(error):
        validate_strategy(ScheduleStrategy((option,), ratio), [JobSpec(0)], scored_backends)


def test_equal_scores_split_canonical_by_id():
    backends = [BackendProfile(0, "a", 0, 0, 0, score=0.8), BackendProfile(1, "b", 0, 0, 0, score=0.8)]
    job = [JobSpec(0)]
    validate_strategy(ScheduleStrategy((Split(0, 1),), 0.5), job, backends)
    with pytest.raises(SplitOrderViolation):
        validate_strategy(ScheduleStrategy((Split(1, 0),), 0.5), job, backends)


def test_single_iteration_job_cannot_split(scored_backends):
    with pytest.raises(StrategyError):
        validate_strategy(ScheduleStrategy((Split(0, 1),), 0.5), [JobSpec(0, 1)], scored_backends)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(one_q_error=-0.1),
        dict(two_q_error=1.5),
        dict(readout_error=float("nan")),
        dict(iter_time=0.0),
        dict(score=0.0),
        dict(score=1.2),
    ],
)
def test_backend_invariants(kwargs):
    base = dict(id=0, name="x", one_q_error=0.0, two_q_error=0.0, readout_error=0.0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        BackendProfile(**base)


def test_job_invariants():
    with pytest.raises(ValueError):
        JobSpec(0, 0, -1.0)
    with pytest.raises(ZeroReference):
        JobSpec(0, 10, 0.0)


@pytest.mark.parametrize("total, ratio, expected", [(150, 0.4, (90, 60)), (2, 0.5, (1, 1)), (150, 0.5, (75, 75))])
def test_split_iterations_examples(total, ratio, expected):
    assert split_iterations(JobSpec(0, total), ratio) == expected


def test_split_iterations_default_ratios():
    job = JobSpec(0, 150)
    assert [split_iterations(job, r) for r in (0.2, 0.4, 0.6, 0.8)] == [(120, 30), (90, 60), (60, 90), (30, 120)]


def test_split_iterations_clamps():
    assert split_iterations(JobSpec(0, 10), 0.01) == (9, 1)
    assert split_iterations(JobSpec(0, 10), 0.99) == (1, 9)
    # 0.25 * 10 = 2.5 rounds half up
    assert split_iterations(JobSpec(0, 10), 0.25) == (7, 3)


ratios = st.floats(min_value=1e-6, max_value=1 - 1e-6)


@given(total=st.integers(2, 10_000), r=ratios)
def test_split_iterations_partition(total, r):
    s1, s2 = split_iterations(JobSpec(0, total), r)
    assert s1 + s2 == total
    assert s1 >= 1 and s2 >= 1


@given(total=st.integers(2, 10_000), r1=ratios, r2=ratios)
def test_split_iterations_monotone(total, r1, r2):
    lo, hi = sorted((r1, r2))
    job = JobSpec(0, total)
    assert split_iterations(job, lo)[1] <= split_iterations(job, hi)[1]


@given(st.lists(st.sampled_from([Single(0), Single(1), Single(2), Split(0, 1), Split(0, 2), Split(1, 2)]), min_size=1, max_size=6))
def test_validate_is_idempotent(options):
    backends = [BackendProfile(i, f"B{i+1}", 0, 0, 0, score=s) for i, s in enumerate((0.7, 0.8, 0.9))]
    jobs = [JobSpec(i) for i in range(len(options))]
    strategy = ScheduleStrategy(tuple(options), 0.5)
    once = validate_strategy(strategy, jobs, backends)
    assert validate_strategy(once, jobs, backends) == strategy


def test_strategy_encoding(fig5_strategy, scored_backends):
    names = {b.id: b.name for b in scored_backends}
    assert fig5_strategy.encode(names) == "split_B2B3|split_B1B2|B3|split_B2B3|split_B1B2"
