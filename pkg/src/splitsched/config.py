"""Backend/job file formats, built-in defaults and run configuration."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

from .domain import BackendProfile, JobSpec, MappingOption, ScheduleStrategy, Single, Split
from .fidelity import SUITE_SIZE, BenchmarkResult, score_backends
from .ga import GaConfig

SEED_ENV = "QUSPLIT_SEED"
DEFAULT_RATIOS = (0.2, 0.4, 0.6, 0.8)


class ConfigError(ValueError):
    pass


class ParseError(ConfigError):
    pass


class InvalidField(ConfigError):
    pass


class EmptyBackends(ConfigError):
    pass


# B1 carries ibm_nazca's error rates and B3 IonQ's; B2 sits between them.
DEFAULT_BACKENDS: list[dict[str, Any]] = [
    {"id": 0, "name": "B1", "one_q_error": 3.38e-4, "two_q_error": 3.12e-2, "readout_error": 2.35e-2, "iter_time": 1.0},
    {"id": 1, "name": "B2", "one_q_error": 3.20e-4, "two_q_error": 1.20e-2, "readout_error": 1.20e-2, "iter_time": 1.0},
    {"id": 2, "name": "B3", "one_q_error": 3.00e-4, "two_q_error": 2.12e-3, "readout_error": 5.10e-3, "iter_time": 1.0},
]

DEFAULT_JOBS: list[dict[str, Any]] = [
    {"id": i, "total_iterations": 150, "reference_value": -1.86} for i in range(5)
]

_BACKEND_FIELDS = {
    "id": int,
    "name": str,
    "one_q_error": float,
    "two_q_error": float,
    "readout_error": float,
}


def _read_list(path: Union[str, Path]) -> list:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, list):
        raise ParseError(f"{path}: expected a JSON list of objects")
    return data


def _coerce(where: str, entry: Any, name: str, kind: type, default: Any = None) -> Any:
    if not isinstance(entry, dict):
        raise InvalidField(f"{where}: expected an object")
    if name not in entry:
        if default is not None:
            return default
        raise InvalidField(f"{where}: missing field {name!r}")
    value = entry[name]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise InvalidField(f"{where}: field {name!r} must be an integer, got {value!r}")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise InvalidField(f"{where}: field {name!r} must be a number, got {value!r}")
    if kind is str and not isinstance(value, str):
        raise InvalidField(f"{where}: field {name!r} must be a string, got {value!r}")
    return kind(value)


def parse_backends(data: Sequence[Any], source: str = "<backends>") -> list[BackendProfile]:
    if not data:
        raise EmptyBackends(f"{source}: no backends defined")
    out, seen = [], set()
    for index, entry in enumerate(data):
        where = f"{source}[{index}]"
        kwargs = {k: _coerce(where, entry, k, kind) for k, kind in _BACKEND_FIELDS.items()}
        kwargs["iter_time"] = _coerce(where, entry, "iter_time", float, 1.0)
        if entry.get("score") is not None:
            kwargs["score"] = _coerce(where, entry, "score", float)
        if kwargs["id"] in seen:
            raise InvalidField(f"{where}: duplicate backend id {kwargs['id']}")
        seen.add(kwargs["id"])
        try:
            out.append(BackendProfile(**kwargs))
        except ValueError as exc:
            raise InvalidField(f"{where}: {exc}") from None
    return out


def load_backends_with_benchmarks(
    path: Optional[Union[str, Path]] = None,
    suite_size: int = SUITE_SIZE,
    seed: int = 0,
) -> tuple[list[BackendProfile], list[BenchmarkResult]]:
    if path is None:
        raw, source = DEFAULT_BACKENDS, "<default backends>"
    else:
        raw, source = _read_list(path), str(path)
    backends = parse_backends(raw, source)
    scored, results = score_backends(backends, suite_size, seed)
    return [b if b.score is not None else s for b, s in zip(backends, scored)], results


def load_backends(
    path: Optional[Union[str, Path]] = None,
    suite_size: int = SUITE_SIZE,
    seed: int = 0,
) -> list[BackendProfile]:
    """Parse a backends file and fill in proxy scores.

    Entries that already carry a ``score`` keep it; the rest are scored on the
    shared benchmark suite.
    """
    return load_backends_with_benchmarks(path, suite_size, seed)[0]


def parse_jobs(data: Sequence[Any], source: str = "<jobs>") -> list[JobSpec]:
    if not data:
        raise ConfigError(f"{source}: no jobs defined")
    out = []
    for index, entry in enumerate(data):
        where = f"{source}[{index}]"
        try:
            out.append(
                JobSpec(
                    _coerce(where, entry, "id", int, index),
                    _coerce(where, entry, "total_iterations", int, 150),
                    _coerce(where, entry, "reference_value", float),
                )
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise InvalidField(f"{where}: {exc}") from None
    return out


def load_jobs(path: Optional[Union[str, Path]] = None) -> list[JobSpec]:
    if path is None:
        return parse_jobs(DEFAULT_JOBS, "<default jobs>")
    return parse_jobs(_read_list(path), str(path))


def replicate_jobs(templates: Sequence[JobSpec], count: int) -> list[JobSpec]:
    """``count`` jobs cycling through ``templates``, renumbered 0..count-1."""
    return [
        JobSpec(i, templates[i % len(templates)].total_iterations, templates[i % len(templates)].reference_value)
        for i in range(count)
    ]


def interpolate_backends(count: int, noisy: BackendProfile, clean: BackendProfile) -> list[BackendProfile]:
    """``count`` unscored backends with error rates spaced geometrically from noisy to clean."""
    if count == 1:
        return [BackendProfile(0, "B1", clean.one_q_error, clean.two_q_error, clean.readout_error)]

    def lerp(a: float, b: float, t: float) -> float:
        if a <= 0 or b <= 0:
            return a + (b - a) * t
        return a * (b / a) ** t

    out = []
    for k in range(count):
        t = k / (count - 1)
        out.append(
            BackendProfile(
                k,
                f"B{k + 1}",
                lerp(noisy.one_q_error, clean.one_q_error, t),
                lerp(noisy.two_q_error, clean.two_q_error, t),
                lerp(noisy.readout_error, clean.readout_error, t),
            )
        )
    return out


def parse_strategy(text: str, backends: Sequence[BackendProfile], split_ratio: float) -> ScheduleStrategy:
    """Parse ``split_B2B3,split_B1B2,B3`` style lists (``split_B2_B3`` also accepted)."""
    by_name = {b.name: b.id for b in backends}
    options: list[MappingOption] = []
    for token in (t.strip() for t in text.replace("|", ",").split(",")):
        if not token:
            continue
        if token in by_name:
            options.append(Single(by_name[token]))
            continue
        if token.lower().startswith("split_"):
            rest = token[len("split_"):]
            parts = rest.split("_")
            if len(parts) == 2 and all(p in by_name for p in parts):
                options.append(Split(by_name[parts[0]], by_name[parts[1]]))
                continue
            pairs = [(a, b) for a in by_name for b in by_name if a + b == rest]
            if len(pairs) == 1:
                options.append(Split(by_name[pairs[0][0]], by_name[pairs[0][1]]))
                continue
        raise ParseError(f"cannot parse mapping option {token!r}")
    return ScheduleStrategy(tuple(options), split_ratio)


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def parse_weights(text: str) -> Union[tuple[float, float], str]:
    if text.strip().lower() == "dynamic":
        return "dynamic"
    try:
        w1, w2 = (float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"weights must be 'dynamic' or 'w1,w2', got {text!r}") from None
    if w1 < 0 or w2 < 0 or abs(w1 + w2 - 1.0) > 1e-9:
        raise ConfigError(f"weights must be nonnegative and sum to 1, got {text!r}")
    return w1, w2


@dataclass
class RunConfig:
    backends_file: Optional[Path] = None
    jobs_file: Optional[Path] = None
    split_ratios: tuple[float, ...] = DEFAULT_RATIOS
    ga: GaConfig = field(default_factory=GaConfig)
    weights: Union[tuple[float, float], str] = (0.5, 0.5)
    seed: int = 0
    output_dir: Path = Path("out")
    suite_size: int = SUITE_SIZE
    workers: int = 1

    def __post_init__(self) -> None:
        for r in self.split_ratios:
            if not (0.0 < r < 1.0):
                raise ConfigError(f"split ratio {r} outside (0, 1)")
        for p in (self.backends_file, self.jobs_file):
            if p is not None and not Path(p).is_file():
                raise ParseError(f"{p}: no such file")

    def backends(self) -> list[BackendProfile]:
        return load_backends(self.backends_file, self.suite_size, self.seed)

    def jobs(self) -> list[JobSpec]:
        return load_jobs(self.jobs_file)
