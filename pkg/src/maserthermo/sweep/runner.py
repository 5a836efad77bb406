from __future__ import annotations

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from maserthermo import __version__
from maserthermo.config import DEFAULT_TOLERANCES, PARAM_KEYS, Tolerances
from maserthermo.core.params import BENCHMARK_PARAMS, EngineParams, validate
from maserthermo.errors import ConfigError, ParameterError
from maserthermo.sweep.records import COLUMNS, PointRecord, eval_point

log = logging.getLogger("sweep")

SWEEP_AXES = PARAM_KEYS + ("delta",)
MAX_AXES = 2


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int
    log_spaced: bool = False

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        """Parse `name:min:max:count[:log]`."""
        parts = [p.strip() for p in str(text).split(":")]
        if len(parts) not in (4, 5) or (len(parts) == 5 and parts[4] != "log"):
            raise ConfigError(f"invalid sweep axis {text!r}; expected name:min:max:count[:log]")
        name = parts[0]
        if name not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {name!r}; expected one of {', '.join(SWEEP_AXES)}")
        try:
            start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise ConfigError(f"invalid sweep axis {text!r}: {exc}") from exc
        axis = cls(name, start, stop, count, log_spaced=len(parts) == 5)
        axis.check()
        return axis

    def check(self) -> None:
        if self.count < 1:
            raise ConfigError(f"sweep axis {self.name}: count must be at least 1")
        if self.log_spaced and not (self.start > 0 and self.stop > 0):
            raise ConfigError(f"sweep axis {self.name}: log spacing needs positive bounds")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.log_spaced:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def spec(self) -> str:
        text = f"{self.name}:{self.start!r}:{self.stop!r}:{self.count}"
        return text + ":log" if self.log_spaced else text


def apply_axis(params: EngineParams, name: str, value: float) -> EngineParams:
    if name == "delta":
        return params.with_detuning(value)
    return params.with_changes(**{name: value})


@dataclass(frozen=True)
class SweepConfig:
    base: EngineParams = BENCHMARK_PARAMS
    axes: tuple[SweepAxis, ...] = ()
    out: Path | None = None
    seed: int = 42
    tolerances: Tolerances = DEFAULT_TOLERANCES
    verify: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if len(self.axes) > MAX_AXES:
            raise ConfigError(f"at most {MAX_AXES} sweep axes are supported, got {len(self.axes)}")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate sweep axis in {names}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def grid_points(self) -> list[EngineParams]:
        """Every grid point in row-major order (last axis fastest), validated up front."""
        if not self.axes:
            points = [self.base]
        else:
            points = []
            for combo in itertools.product(*(axis.values() for axis in self.axes)):
                p = self.base
                for axis, value in zip(self.axes, combo):
                    p = apply_axis(p, axis.name, float(value))
                points.append(p)
        for idx, p in enumerate(points):
            try:
                validate(p)
            except ParameterError as exc:
                raise ConfigError(f"grid point {idx} is invalid: {exc}") from exc
        return points

    def header_lines(self) -> list[str]:
        lines = [
            f"# maserthermo {__version__}",
            f"# seed = {self.seed}",
        ]
        lines += [f"# {k} = {v!r}" for k, v in self.base.as_dict().items()]
        lines += [f"# sweep = {axis.spec()}" for axis in self.axes]
        lines.append(f"# verify = {str(self.verify).lower()}")
        return lines


@dataclass
class SweepSummary:
    rows: int = 0
    invariant_failures: int = 0
    failed_checks: dict[str, int] = field(default_factory=dict)
    naive_violations: int = 0
    out: Path | None = None
    elapsed: float = 0.0

    def line(self) -> str:
        return (
            f"rows={self.rows} invariant_failures={self.invariant_failures} "
            f"naive_violations={self.naive_violations} out={self.out or '-'}"
        )


def _flag_text(value) -> str:
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    return "true" if bool(value) else "false"


def records_frame(records: list[PointRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.as_row() for r in records], columns=list(COLUMNS))


def write_csv(records: list[PointRecord], path: Path, header_lines: list[str]) -> None:
    frame = records_frame(records)
    for col in frame.columns:
        if frame[col].map(lambda v: isinstance(v, (bool, np.bool_))).any():
            frame[col] = frame[col].map(_flag_text)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for line in header_lines:
                fh.write(line + "\n")
            frame.to_csv(fh, index=False, float_format="%.17g", lineterminator="\n", na_rep="")
    except OSError as exc:
        raise ConfigError(f"cannot write sweep output {path}: {exc}") from exc


def run_sweep(config: SweepConfig) -> tuple[list[PointRecord], SweepSummary]:
    t0 = time.time()
    points = config.grid_points()
    log.info("Sweep start. points=%s axes=%s workers=%s", len(points),
             [a.spec() for a in config.axes], config.workers)

    def _one(p: EngineParams) -> PointRecord:
        return eval_point(p, verify=config.verify, tolerances=config.tolerances)

    if config.workers == 1:
        records = [_one(p) for p in points]
    else:
        # map() yields in submission order, so rows stay row-major
        with ThreadPoolExecutor(max_workers=config.workers) as ex:
            records = list(ex.map(_one, points))

    summary = SweepSummary(rows=len(records), out=config.out)
    for r in records:
        failures = r.invariant_failures
        if failures:
            summary.invariant_failures += 1
            for name in failures:
                summary.failed_checks[name] = summary.failed_checks.get(name, 0) + 1
        summary.naive_violations += int(r.naive_violation)

    if config.out is not None:
        write_csv(records, Path(config.out), config.header_lines())
    summary.elapsed = time.time() - t0
    log.info("Sweep completed. %s elapsed=%.2fs", summary.line(), summary.elapsed)
    if summary.failed_checks:
        log.warning("Invariant failures by check: %s", summary.failed_checks)
    return records, summary
