"""Command-line entry point and experiment drivers.

Subcommands: ``score-backends``, ``schedule``, ``dse``, ``vqe-demo``, ``timing``.
All data outputs are CSV files under ``--output-dir``; apart from wall-clock
columns they are a pure function of the input files and ``--seed``.
"""

from __future__ import annotations

import argparse
import gc
import logging
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from . import reports
from .config import (
    DEFAULT_RATIOS,
    ConfigError,
    RunConfig,
    interpolate_backends,
    load_backends_with_benchmarks,
    parse_strategy,
    parse_weights,
    replicate_jobs,
    resolve_seed,
)
from .domain import BackendProfile, JobSpec, ScheduleStrategy, StrategyError
from .fidelity import noise_index, rank_backends, score_backends
from .ga import GaConfig, evolve
from .scheduler import (
    SpaceTooLarge,
    brute_force_frontier,
    deviation_distribution,
    evaluate,
    method1_strategy,
    method2_strategy,
    simulate_timeline,
)
from .vqe_sim import (
    DEFAULT_TOL_FRACTION,
    ConvergenceModel,
    energy_floor,
    final_score,
    iterations_to_converge,
    split_run,
    tail_sweep,
)

log = logging.getLogger("splitsched")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_STRATEGY = 3
EXIT_SPACE = 4
EXIT_DSE_MISS = 5


def _names(backends: Sequence[BackendProfile]) -> dict[int, str]:
    return {b.id: b.name for b in backends}


def _ga_config(config: RunConfig, seed: Optional[int] = None) -> GaConfig:
    return replace(config.ga, seed=config.seed if seed is None else seed, weights=config.weights)


# ---------------------------------------------------------------- score-backends


def run_score_backends(config: RunConfig) -> list[BackendProfile]:
    backends, results = load_backends_with_benchmarks(config.backends_file, config.suite_size, config.seed)
    rank = {b.id: i + 1 for i, b in enumerate(rank_backends(backends))}
    out = Path(config.output_dir)
    reports.write_csv(
        out / "backends_scored.csv",
        reports.BACKEND_COLUMNS,
        [
            (b.id, b.name, b.one_q_error, b.two_q_error, b.readout_error, b.iter_time,
             noise_index(b), b.score, rank[b.id])
            for b in backends
        ],
    )
    reports.write_csv(
        out / "benchmarks.csv",
        reports.BENCHMARK_COLUMNS,
        [(r.job_id, r.backend_id, r.reference_value, r.measured_value, r.deviation, r.score) for r in results],
    )
    print(f"{'rank':>4}  {'backend':<10} {'noise_index':>12} {'score':>8}")
    for b in rank_backends(backends):
        print(f"{rank[b.id]:>4}  {b.name:<10} {noise_index(b):>12.5f} {b.score:>8.4f}")
    return backends


# ---------------------------------------------------------------------- schedule


@dataclass
class ScheduleRun:
    job_count: int
    method: str
    ratio: Optional[float]
    strategy: ScheduleStrategy
    metrics: object
    wall_seconds: float
    history: list = field(default_factory=list)

    @property
    def label(self) -> str:
        return self.method if self.ratio is None else f"{self.method}_r{self.ratio!r}"


def _schedule_one(
    config: RunConfig,
    jobs: list[JobSpec],
    backends: list[BackendProfile],
    forced: Optional[str],
) -> list[ScheduleRun]:
    n = len(jobs)
    ga_cfg = _ga_config(config)
    weights = ga_cfg.resolve_weights(n)
    runs = []
    for ratio in config.split_ratios:
        start = time.perf_counter()
        result = evolve(ga_cfg, jobs, backends, ratio, workers=config.workers)
        wall = time.perf_counter() - start
        runs.append(ScheduleRun(n, "ga", ratio, result.strategy, result.metrics, wall, result.history))
    for method, build in (("method1", method1_strategy), ("method2", method2_strategy)):
        start = time.perf_counter()
        strategy = build(jobs, backends)
        metrics = evaluate(strategy, jobs, backends, weights)
        runs.append(ScheduleRun(n, method, None, strategy, metrics, time.perf_counter() - start))
    if forced:
        for ratio in config.split_ratios:
            strategy = parse_strategy(forced, backends, ratio)
            start = time.perf_counter()
            metrics = evaluate(strategy, jobs, backends, weights)
            runs.append(ScheduleRun(n, "forced", ratio, strategy, metrics, time.perf_counter() - start))
    return runs


def _write_schedule_details(
    out: Path, runs: list[ScheduleRun], jobs: list[JobSpec], backends: list[BackendProfile]
) -> None:
    names = _names(backends)
    deviations, strategies = [], []
    for run in runs:
        events, _ = simulate_timeline(jobs, run.strategy, backends)
        reports.write_csv(out / f"timeline_{run.label}.csv", reports.TIMELINE_COLUMNS, reports.timeline_rows(events))
        if run.history:
            reports.write_csv(out / f"history_{run.label}.csv", reports.HISTORY_COLUMNS, reports.history_rows(run.history))
        for job, dev in zip(jobs, deviation_distribution(run.strategy, jobs, backends)):
            deviations.append((run.label, job.id, dev))
        strategies.append((run.job_count, run.method, run.ratio, run.strategy.encode(names)))
    reports.write_csv(out / "deviations.csv", reports.DEVIATION_COLUMNS, deviations)
    reports.write_csv(out / "strategies.csv", reports.STRATEGY_COLUMNS, strategies)

    forced = [r for r in runs if r.method == "forced"]
    if forced:
        chosen = forced[0]
    else:
        chosen = max((r for r in runs if r.method == "ga"), key=lambda r: r.metrics.fitness)
    events, _ = simulate_timeline(jobs, chosen.strategy, backends)
    reports.write_csv(out / "timeline.csv", reports.TIMELINE_COLUMNS, reports.timeline_rows(events))


def run_schedule(
    config: RunConfig,
    job_counts: Optional[Sequence[int]] = None,
    strategy: Optional[str] = None,
) -> list[ScheduleRun]:
    """GA per split ratio plus both baselines, for one workload or a job-count sweep."""
    backends = config.backends()
    templates = config.jobs()
    out = Path(config.output_dir)
    sweep = list(job_counts) if job_counts else [None]
    all_runs: list[ScheduleRun] = []
    for count in sweep:
        jobs = templates if count is None else replicate_jobs(templates, count)
        runs = _schedule_one(config, jobs, backends, strategy)
        target = out if len(sweep) == 1 else out / f"n{len(jobs)}"
        _write_schedule_details(target, runs, jobs, backends)
        all_runs.extend(runs)

    reports.write_csv(
        out / "schedule.csv",
        reports.SCHEDULE_COLUMNS,
        [
            (r.job_count, r.method, r.ratio, r.metrics.throughput, r.metrics.throughput_norm,
             r.metrics.fidelity, r.metrics.fitness, r.metrics.makespan, r.wall_seconds)
            for r in all_runs
        ],
    )
    print(f"{'jobs':>5} {'method':<8} {'ratio':>5} {'TH':>10} {'TH_norm':>8} {'FI':>7} {'fitness':>8} {'seconds':>8}")
    for r in all_runs:
        ratio = "" if r.ratio is None else f"{r.ratio:g}"
        m = r.metrics
        print(f"{r.job_count:>5} {r.method:<8} {ratio:>5} {m.throughput:>10.6f} {m.throughput_norm:>8.4f} "
              f"{m.fidelity:>7.4f} {m.fitness:>8.4f} {r.wall_seconds:>8.3f}")
    return all_runs


# --------------------------------------------------------------------------- dse


@dataclass
class DseReport:
    space_size: int
    frontier_size: int
    best_fitness: float
    ga_fitness: list[float]
    misses: list[str]

    @property
    def ok(self) -> bool:
        return not self.misses


def near_frontier(metrics, frontier, tol: float) -> bool:
    """Within ``tol`` of some frontier point on both normalized throughput and fidelity."""
    return any(
        abs(f.throughput_norm - metrics.throughput_norm) <= tol and abs(f.fidelity - metrics.fidelity) <= tol
        for f in frontier
    )


def run_dse(
    config: RunConfig,
    num_jobs: int = 2,
    ratio: float = 0.5,
    ga_runs: int = 5,
    fitness_tol: float = 0.02,
    frontier_tol: float = 0.01,
    cap: int = 10**6,
) -> DseReport:
    """Brute-force the design space, then check GA picks against it."""
    backends = config.backends()
    jobs = replicate_jobs(config.jobs(), num_jobs)
    weights = _ga_config(config).resolve_weights(num_jobs)
    space = brute_force_frontier(jobs, backends, ratio, weights, cap)
    frontier = [p.metrics for p in space.frontier]
    names = _names(backends)

    ga_choices, ga_rows, misses = set(), [], []
    for k in range(ga_runs):
        seed = config.seed + k
        result = evolve(_ga_config(config, seed), jobs, backends, ratio, workers=config.workers)
        encoded = result.strategy.encode(names)
        ga_choices.add(encoded)
        ratio_to_best = result.fitness / space.best.metrics.fitness
        near = near_frontier(result.metrics, frontier, frontier_tol)
        ga_rows.append((seed, encoded, result.metrics.throughput, result.metrics.fidelity,
                        result.metrics.fitness, ratio_to_best, near))
        if ratio_to_best < 1.0 - fitness_tol or not near:
            misses.append(f"seed {seed}: {encoded} fitness ratio {ratio_to_best:.4f}, near frontier: {near}")

    out = Path(config.output_dir)
    reports.write_csv(
        out / "dse.csv",
        reports.DSE_COLUMNS,
        [
            (p.strategy.encode(names), p.metrics.throughput, p.metrics.fidelity, keep,
             p.strategy.encode(names) in ga_choices)
            for p, keep in zip(space.points, space.pareto)
        ],
    )
    reports.write_csv(
        out / "frontier.csv",
        reports.FRONTIER_COLUMNS,
        [(p.strategy.encode(names), p.metrics.throughput, p.metrics.fidelity, p.metrics.fitness)
         for p in space.frontier],
    )
    reports.write_csv(
        out / "dse_ga.csv",
        ("seed", "strategy", "TH", "FI", "fitness", "fitness_ratio", "near_frontier"),
        ga_rows,
    )
    report = DseReport(len(space.points), len(frontier), space.best.metrics.fitness,
                       [row[4] for row in ga_rows], misses)
    print(f"{report.space_size} strategies, {report.frontier_size} on the Pareto frontier, "
          f"best fitness {report.best_fitness:.4f} ({space.best.strategy.encode(names)})")
    for row in ga_rows:
        print(f"  GA seed {row[0]}: {row[1]} fitness {row[4]:.4f} ({row[5]:.2%} of best)")
    for miss in misses:
        print(f"  MISS {miss}", file=sys.stderr)
    return report


# ---------------------------------------------------------------------- vqe-demo


def run_vqe_demo(
    config: RunConfig,
    noisy: Optional[str] = None,
    clean: Optional[str] = None,
    tail: int = 30,
    model: ConvergenceModel = ConvergenceModel(),
    tol_fraction: float = DEFAULT_TOL_FRACTION,
) -> dict[str, dict]:
    """All-noisy, all-clean and split trajectories plus a full tail-length sweep."""
    backends = config.backends()
    ranked = rank_backends(backends)
    by_name = {b.name: b for b in backends}
    try:
        noisy_b = by_name[noisy] if noisy else ranked[-1]
        clean_b = by_name[clean] if clean else ranked[0]
    except KeyError as exc:
        raise ConfigError(f"unknown backend {exc.args[0]!r}") from None
    if noisy_b.id == clean_b.id:
        raise ConfigError("vqe-demo needs two distinct backends")
    job = config.jobs()[0]
    ref = job.reference_value
    tol = tol_fraction * abs(ref)
    total = job.total_iterations

    runs = {
        "all_noisy": split_run(job, noisy_b, clean_b, 0, model, config.seed),
        "all_clean": split_run(job, noisy_b, clean_b, total, model, config.seed),
        "split": split_run(job, noisy_b, clean_b, tail, model, config.seed),
    }
    summary: dict[str, dict] = {}
    for name, traj in runs.items():
        final_backend = noisy_b if name == "all_noisy" else clean_b
        target = energy_floor(final_backend, ref, model.floor_kappa)
        stage2 = None
        if name == "split" and tail:
            stage2 = iterations_to_converge(traj.energies[total - tail:], target, tol)
        summary[name] = {
            "final_energy": traj.final_energy,
            "score": final_score(traj, ref),
            "iterations_to_converge": iterations_to_converge(traj, target, tol),
            "stage2_iterations_to_converge": stage2,
        }

    out = Path(config.output_dir)
    reports.write_csv(
        out / "vqe.csv",
        reports.VQE_COLUMNS,
        [(name, it, bid, e) for name, traj in runs.items() for it, bid, e in traj.rows()],
    )
    sweep = tail_sweep(job, noisy_b, clean_b, range(total + 1), model, config.seed)
    reports.write_csv(out / "tail_sweep.csv", reports.TAIL_COLUMNS, sweep)
    reports.write_csv(
        out / "convergence.csv",
        reports.CONVERGENCE_COLUMNS,
        [(name, s["final_energy"], s["score"], s["iterations_to_converge"], s["stage2_iterations_to_converge"])
         for name, s in summary.items()],
    )
    print(f"noisy={noisy_b.name} clean={clean_b.name} ref={ref} tail={tail} tol={tol:.4f}")
    for name, s in summary.items():
        conv = s["iterations_to_converge"]
        extra = "" if s["stage2_iterations_to_converge"] is None else f", stage 2 converged in {s['stage2_iterations_to_converge']}"
        print(f"  {name:<10} E={s['final_energy']:.4f} score={s['score']:.4f} "
              f"converged at {conv if conv is not None else 'never'}{extra}")
    return summary


# ------------------------------------------------------------------------ timing


def _timed_evolve(config: RunConfig, jobs, pool) -> float:
    gc.collect()
    gc.disable()
    try:
        start = time.perf_counter()
        evolve(_ga_config(config), jobs, pool, config.split_ratios[0], workers=config.workers)
        return time.perf_counter() - start
    finally:
        gc.enable()


def run_timing(
    config: RunConfig,
    job_counts: Sequence[int] = tuple(range(10, 81, 10)),
    backend_counts: Sequence[int] = (3, 10),
    repeats: int = 3,
) -> list[tuple[int, int, float]]:
    """Best-of-``repeats`` GA wall time per (job count, backend count).

    Repeats interleave the backend counts so slow phases of the host hit every
    cell alike, and the garbage collector is paused inside each timed run.
    The minimum is the least noise-sensitive estimate of the intrinsic cost.
    """
    base = config.backends()
    ranked = rank_backends(base)
    templates = config.jobs()
    pools = {}
    for n_backends in sorted(set(backend_counts)):
        pools[n_backends], _ = score_backends(
            interpolate_backends(n_backends, ranked[-1], ranked[0]), config.suite_size, config.seed
        )
    for pool in pools.values():
        _timed_evolve(config, replicate_jobs(templates, min(job_counts)), pool)  # warm-up
    rows = []
    for n_jobs in job_counts:
        jobs = replicate_jobs(templates, n_jobs)
        samples: dict[int, list[float]] = {n: [] for n in pools}
        for _ in range(max(1, repeats)):
            for n_backends, pool in pools.items():
                samples[n_backends].append(_timed_evolve(config, jobs, pool))
        for n_backends in pools:
            rows.append((n_jobs, n_backends, min(samples[n_backends])))
            log.info("timing jobs=%d backends=%d %.3fs", n_jobs, n_backends, rows[-1][2])
    rows.sort(key=lambda r: (r[1], r[0]))
    reports.write_csv(Path(config.output_dir) / "timing.csv", reports.TIMING_COLUMNS, rows)
    print(f"{'jobs':>5} {'backends':>8} {'seconds':>9}")
    for n_jobs, n_backends, seconds in rows:
        print(f"{n_jobs:>5} {n_backends:>8} {seconds:>9.3f}")
    return rows


# ------------------------------------------------------------------------- argv


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="RNG seed (env QUSPLIT_SEED as fallback)")
    parser.add_argument("--output-dir", type=Path, default=default if suppress else Path("out"))
    parser.add_argument("--workers", type=int, default=default if suppress else 1,
                        help="processes for fitness evaluation; results do not depend on it")
    parser.add_argument("-v", "--verbose", action="store_true", default=default if suppress else False)


def _run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backends", type=Path, help="backends JSON file (default: built-in B1/B2/B3)")
    parser.add_argument("--jobs", type=Path, help="jobs JSON file (default: five 150-iteration jobs)")
    parser.add_argument("--ratios", type=_float_list, default=list(DEFAULT_RATIOS))
    parser.add_argument("--weights", default="0.5,0.5", help="'w1,w2' or 'dynamic'")
    parser.add_argument("--population", type=int, default=10)
    parser.add_argument("--generations", type=int, default=100)
    parser.add_argument("--mutation-rate", type=float, default=0.2)
    parser.add_argument("--elite", type=int, default=2)
    parser.add_argument("--suite-size", type=int, default=5, help="benchmark circuits per backend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitsched",
        description="Fidelity-aware scheduling of split variational jobs across noisy backends.",
    )
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score-backends", help="compute proxy fidelity scores and rank backends")
    _global_options(p, suppress=True)
    _run_options(p)

    p = sub.add_parser("schedule", help="GA schedule per split ratio vs. the two baselines")
    _global_options(p, suppress=True)
    _run_options(p)
    p.add_argument("--job-counts", type=_int_list, help="sweep workload sizes, e.g. 10,20,...,80")
    p.add_argument("--strategy", help="also evaluate a fixed strategy, e.g. split_B2B3,split_B1B2,B3")

    p = sub.add_parser("dse", help="brute-force design space and Pareto frontier vs. GA picks")
    _global_options(p, suppress=True)
    _run_options(p)
    p.add_argument("--num-jobs", type=int, default=2)
    p.add_argument("--ratio", type=float, default=0.5)
    p.add_argument("--ga-runs", type=int, default=5)
    p.add_argument("--fitness-tol", type=float, default=0.02)
    p.add_argument("--frontier-tol", type=float, default=0.01)
    p.add_argument("--cap", type=int, default=10**6)

    p = sub.add_parser("vqe-demo", help="surrogate convergence of noisy, clean and split runs")
    _global_options(p, suppress=True)
    _run_options(p)
    p.add_argument("--noisy", help="backend name for stage 1 (default: lowest score)")
    p.add_argument("--clean", help="backend name for stage 2 (default: highest score)")
    p.add_argument("--tail", type=int, default=30)
    p.add_argument("--tau", type=float, default=10.0)
    p.add_argument("--floor-kappa", type=float, default=1.0)
    p.add_argument("--e-start", type=float, default=0.0)
    p.add_argument("--jitter", action="store_true")

    p = sub.add_parser("timing", help="GA wall time versus job and backend counts")
    _global_options(p, suppress=True)
    _run_options(p)
    p.add_argument("--job-counts", type=_int_list, default=list(range(10, 81, 10)))
    p.add_argument("--backend-counts", type=_int_list, default=[3, 10])
    p.add_argument("--repeats", type=int, default=3, help="timed runs per cell; the minimum is reported")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    seed = resolve_seed(args.seed)
    ga = GaConfig(
        population_size=args.population,
        generations=args.generations,
        mutation_rate=args.mutation_rate,
        elite_size=args.elite,
        seed=seed,
    )
    return RunConfig(
        backends_file=args.backends,
        jobs_file=args.jobs,
        split_ratios=tuple(args.ratios),
        ga=ga,
        weights=parse_weights(args.weights),
        seed=seed,
        output_dir=args.output_dir,
        suite_size=args.suite_size,
        workers=max(1, args.workers),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = _config_from_args(args)
        if args.command == "score-backends":
            run_score_backends(config)
        elif args.command == "schedule":
            run_schedule(config, args.job_counts, args.strategy)
        elif args.command == "dse":
            report = run_dse(config, args.num_jobs, args.ratio, args.ga_runs,
                             args.fitness_tol, args.frontier_tol, args.cap)
            if not report.ok:
                return EXIT_DSE_MISS
        elif args.command == "vqe-demo":
            model = ConvergenceModel(e_start=args.e_start, tau=args.tau,
                                     floor_kappa=args.floor_kappa, jitter=args.jitter)
            run_vqe_demo(config, args.noisy, args.clean, args.tail, model)
        elif args.command == "timing":
            run_timing(config, args.job_counts, args.backend_counts, args.repeats)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StrategyError as exc:
        print(f"invalid strategy: {exc}", file=sys.stderr)
        return EXIT_STRATEGY
    except SpaceTooLarge as exc:
        print(f"design space too large: {exc}", file=sys.stderr)
        return EXIT_SPACE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
