import numpy as np
import pytest
from hypothesis import given, strategies as st

from splitsched.domain import JobSpec, validate_strategy
from splitsched.ga import (
    EmptyOptions,
    GaConfig,
    Individual,
    crossover,
    decode,
    dynamic_weights,
    evolve,
    initialize_population,
    mutate,
    mutation_mask,
    roulette_select,
)
from splitsched.scheduler import brute_force_frontier, enumerate_mapping_options


def test_config_validation():
    for kwargs in (dict(mutation_rate=1.5), dict(elite_size=10), dict(population_size=0), dict(weights="greedy")):
        with pytest.raises(ValueError):
            GaConfig(**kwargs)
    assert GaConfig(weights="dynamic").resolve_weights(20) == (0.5, 0.5)


def test_initialize_population():
    cfg = GaConfig()
    pop = initialize_population(cfg, 5, 6, rng=3)
    assert len(pop) == 10
    assert all(len(p.genes) == 5 and all(0 <= g < 6 for g in p.genes) for p in pop)
    assert [p.genes for p in pop] == [p.genes for p in initialize_population(cfg, 5, 6, rng=3)]
    assert all(p.genes == (0,) * 5 for p in initialize_population(cfg, 5, 1, rng=3))
    with pytest.raises(EmptyOptions):
        initialize_population(cfg, 5, 0, rng=3)


def test_dynamic_weights():
    assert dynamic_weights(20) == (0.5, 0.5)
    w1, w2 = dynamic_weights(80)
    assert w1 == pytest.approx(0.8) and w2 == pytest.approx(0.2)
    assert dynamic_weights(10**6)[0] > 0.9999


@given(a=st.integers(1, 10_000), b=st.integers(1, 10_000))
def test_dynamic_weights_monotone(a, b):
    lo, hi = sorted((a, b))
    w_lo, w_hi = dynamic_weights(lo), dynamic_weights(hi)
    assert sum(w_lo) == pytest.approx(1.0)
    assert w_lo[0] <= w_hi[0]


def test_roulette_degenerate_and_frequencies():
    assert set(roulette_select([1.0, 0.0], 1000, rng=0)) == {0}
    picks = roulette_select([3.0, 1.0], 10_000, rng=0)
    assert abs(picks.count(0) / 10_000 - 0.75) <= 0.02
    uniform = np.bincount(roulette_select([1.0] * 4, 20_000, rng=1), minlength=4) / 20_000
    # 4-sigma band for p = 0.25, n = 20000
    assert np.all(np.abs(uniform - 0.25) <= 4 * np.sqrt(0.25 * 0.75 / 20_000))


def test_roulette_all_zero_falls_back_to_uniform(caplog):
    picks = roulette_select([0.0, 0.0, 0.0], 3000, rng=2)
    assert set(picks) == {0, 1, 2}
    assert "uniform" in caplog.text


def test_crossover():
    a, b = (0,) * 5, (1,) * 5
    assert crossover(a, b, rng=0, cut=2) == ((0, 0, 1, 1, 1), (1, 1, 0, 0, 0))
    assert crossover(a, a, rng=0) == (a, a)
    assert crossover((3,), (4,), rng=0) == ((3,), (4,))
    with pytest.raises(ValueError):
        crossover((1, 2), (1,), rng=0)


@given(
    a=st.lists(st.integers(0, 9), min_size=1, max_size=12),
    seed=st.integers(0, 2**32 - 1),
)
def test_crossover_positional_conservation(a, seed):
    b = [(g + 3) % 10 for g in a]
    c, d = crossover(a, b, rng=seed)
    for i in range(len(a)):
        assert sorted((c[i], d[i])) == sorted((a[i], b[i]))


def test_mutate_edges():
    genes = (0, 1, 2, 3, 4)
    assert mutate(genes, 0.0, 6, rng=0) == genes
    assert mutate((0,) * 5, 1.0, 1, rng=0) == (0,) * 5


def test_mutate_only_touches_masked_positions():
    genes = (5,) * 20
    rng_a, rng_b = np.random.default_rng(4), np.random.default_rng(4)
    out = mutate(genes, 0.3, 5, rng_a)
    mask = mutation_mask(20, 0.3, rng_b)
    # options 0..4 never equal the starting gene 5, so every masked gene changes
    assert [o != 5 for o in out] == list(mask)


def test_mutation_count_binomial_mean():
    rng = np.random.default_rng(0)
    counts = [mutation_mask(5, 0.2, rng).sum() for _ in range(10_000)]
    assert abs(np.mean(counts) - 1.0) <= 0.05


def test_evolve_zero_generations(default_backends):
    jobs = [JobSpec(i) for i in range(4)]
    result = evolve(GaConfig(generations=0, seed=3), jobs, default_backends)
    assert len(result.history) == 1
    assert result.fitness == result.history[0].best_fitness


@pytest.mark.parametrize("seed", range(5))
def test_history_non_decreasing(seed, default_backends):
    jobs = [JobSpec(i) for i in range(8)]
    result = evolve(GaConfig(generations=60, elite_size=1, seed=seed), jobs, default_backends, 0.4)
    best = [h.best_fitness for h in result.history]
    assert all(b >= a for a, b in zip(best, best[1:]))
    assert result.fitness == best[-1]


def test_seed_determinism(default_backends):
    jobs = [JobSpec(i) for i in range(6)]
    a = evolve(GaConfig(generations=30, seed=9), jobs, default_backends, 0.6)
    b = evolve(GaConfig(generations=30, seed=9), jobs, default_backends, 0.6)
    assert a.strategy == b.strategy and a.history == b.history


def test_workers_do_not_change_results(default_backends):
    jobs = [JobSpec(i) for i in range(6)]
    serial = evolve(GaConfig(generations=10, seed=2), jobs, default_backends, 0.5)
    parallel = evolve(GaConfig(generations=10, seed=2), jobs, default_backends, 0.5, workers=2)
    assert serial.strategy == parallel.strategy and serial.history == parallel.history


def test_every_individual_decodes_to_valid_strategy(default_backends):
    jobs = [JobSpec(i) for i in range(5)]
    options = enumerate_mapping_options(default_backends)
    pop = initialize_population(GaConfig(population_size=50), len(jobs), len(options), rng=0)
    rng = np.random.default_rng(0)
    for p in pop:
        child = mutate(crossover(p.genes, pop[0].genes, rng)[0], 0.5, len(options), rng)
        validate_strategy(decode(child, options, 0.5), jobs, default_backends)


def test_oracle_comparison_two_jobs(default_backends):
    jobs = [JobSpec(0), JobSpec(1)]
    oracle = brute_force_frontier(jobs, default_backends, 0.5, (0.5, 0.5))
    result = evolve(GaConfig(seed=0), jobs, default_backends, 0.5)
    assert result.fitness >= 0.98 * oracle.best.metrics.fitness
