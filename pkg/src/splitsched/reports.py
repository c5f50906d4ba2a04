"""CSV report writers. Every file gets a header row and a fixed column order."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

SCHEDULE_COLUMNS = ("job_count", "method", "ratio", "TH", "TH_norm", "FI", "fitness", "makespan", "wall_seconds")
TIMELINE_COLUMNS = ("job_id", "stage", "backend_id", "start", "finish")
DSE_COLUMNS = ("strategy", "TH", "FI", "is_pareto", "is_ga_choice")
FRONTIER_COLUMNS = ("strategy", "TH", "FI", "fitness")
VQE_COLUMNS = ("run", "iteration", "backend_id", "energy")
DEVIATION_COLUMNS = ("method", "job_id", "deviation")
HISTORY_COLUMNS = ("generation", "best_fitness", "mean_fitness")
TIMING_COLUMNS = ("job_count", "backend_count", "seconds")
TAIL_COLUMNS = ("tail_length", "score")
CONVERGENCE_COLUMNS = ("run", "final_energy", "score", "iterations_to_converge", "stage2_iterations_to_converge")
STRATEGY_COLUMNS = ("job_count", "method", "ratio", "strategy")
BACKEND_COLUMNS = ("id", "name", "one_q_error", "two_q_error", "readout_error", "iter_time", "noise_index", "score", "rank")
BENCHMARK_COLUMNS = ("job_id", "backend_id", "reference_value", "measured_value", "deviation", "score")

# columns that hold wall-clock measurements and are excluded from determinism checks
WALL_CLOCK_COLUMNS = frozenset({"wall_seconds", "seconds"})


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"{path.name}: row has {len(row)} fields, expected {len(columns)}")
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def timeline_rows(events) -> list[tuple]:
    return [(e.job_id, e.stage, e.backend_id, e.start, e.finish) for e in events]


def history_rows(history) -> list[tuple]:
    return [(h.generation, h.best_fitness, h.mean_fitness) for h in history]


def deterministic_view(path: Path) -> list[list[str]]:
    """CSV content with wall-clock columns dropped."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return rows
    keep = [i for i, name in enumerate(rows[0]) if name not in WALL_CLOCK_COLUMNS]
    return [[row[i] for i in keep] for row in rows]
