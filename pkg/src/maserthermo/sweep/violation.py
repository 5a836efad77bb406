"""Random search for operating points where naive bath temperatures give sigma < 0."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from maserthermo.config import DEFAULT_TOLERANCES, Tolerances
from maserthermo.core.params import BENCHMARK_PARAMS, EngineParams, validate
from maserthermo.dynamics.steady_state import rate_u_to_l
from maserthermo.errors import ConfigError, ParameterError, PointEvaluationError
from maserthermo.sweep.records import NAIVE_VIOLATION_THRESHOLD, PointRecord, eval_point
from maserthermo.thermo import entropy

log = logging.getLogger("violation")

SEARCH_DIMENSIONS = ("delta", "n_u", "n_l", "gamma_u", "gamma_l", "epsilon")
DEFAULT_BUDGET = 100_000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class SearchRange:
    low: float
    high: float
    log_spaced: bool = False

    def __post_init__(self) -> None:
        if not self.high >= self.low:
            raise ConfigError(f"search range high ({self.high}) below low ({self.low})")
        if self.log_spaced and not self.low > 0:
            raise ConfigError("log-spaced search range needs a positive lower bound")

    def sample(self, rng: np.random.Generator) -> float:
        if self.log_spaced:
            return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))
        return float(rng.uniform(self.low, self.high))


DEFAULT_RANGES = {
    "delta": SearchRange(-2.0, 2.0),
    "n_u": SearchRange(0.0, 5.0),
    "n_l": SearchRange(0.0, 5.0),
    "gamma_u": SearchRange(0.1, 10.0, log_spaced=True),
    "gamma_l": SearchRange(0.1, 10.0, log_spaced=True),
    "epsilon": SearchRange(0.01, 2.0, log_spaced=True),
}


@dataclass(frozen=True)
class SearchConfig:
    base: EngineParams = BENCHMARK_PARAMS
    ranges: dict[str, SearchRange] = field(default_factory=lambda: dict(DEFAULT_RANGES))
    fixed: dict[str, float] = field(default_factory=dict)
    tie_occupations: bool = False
    budget: int = DEFAULT_BUDGET
    seed: int = DEFAULT_SEED
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self) -> None:
        unknown = (set(self.ranges) | set(self.fixed)) - set(SEARCH_DIMENSIONS)
        if unknown:
            raise ConfigError(f"unknown search dimension(s): {', '.join(sorted(unknown))}")
        missing = set(SEARCH_DIMENSIONS) - set(self.ranges) - set(self.fixed)
        if missing:
            raise ConfigError(f"no range or fixed value for: {', '.join(sorted(missing))}")
        if self.budget < 1:
            raise ConfigError("budget must be at least 1")

    def draw(self, rng: np.random.Generator) -> EngineParams:
        # every dimension consumes a draw, pinned or not, so pinning does not shift the stream
        values = {}
        for name in SEARCH_DIMENSIONS:
            drawn = self.ranges[name].sample(rng) if name in self.ranges else 0.0
            values[name] = float(self.fixed.get(name, drawn))
        if self.tie_occupations:
            values["n_l"] = values["n_u"]
        delta = values.pop("delta")
        return self.base.with_changes(**values).with_detuning(delta)


@dataclass(frozen=True)
class ViolationResult:
    found: bool
    record: PointRecord | None
    samples_tried: int
    seed: int = DEFAULT_SEED


def naive_sigma(params: EngineParams) -> float:
    return entropy.entropy_production(params, entropy.SIGMA_FULL_NAIVE).sigma


def _confirmed(record: PointRecord) -> bool:
    return (
        record.naive_violation
        and record.sigma_bare > 0
        and record.sigma_full_corrected is not None
        and record.sigma_full_corrected > 0
    )


def find_violation(config: SearchConfig | None = None) -> ViolationResult:
    config = config or SearchConfig()
    rng = np.random.default_rng(config.seed)
    log.info("Violation search start. seed=%s budget=%s", config.seed, config.budget)
    for k in range(1, config.budget + 1):
        params = config.draw(rng)
        try:
            validate(params)
        except ParameterError:
            continue
        if not rate_u_to_l(params) > 0 or not naive_sigma(params) < NAIVE_VIOLATION_THRESHOLD:
            continue
        try:
            record = eval_point(params, tolerances=config.tolerances)
        except PointEvaluationError as exc:
            log.warning("candidate rejected at sample %s: %s", k, exc)
            continue
        if _confirmed(record):
            log.info("Violation found. samples=%s sigma_naive=%.6g sigma_bare=%.6g",
                     k, record.sigma_full_naive, record.sigma_bare)
            return ViolationResult(found=True, record=record, samples_tried=k, seed=config.seed)
        log.debug("candidate at sample %s not confirmed by the other conventions", k)
    log.info("Violation search exhausted. samples=%s", config.budget)
    return ViolationResult(found=False, record=None, samples_tried=config.budget, seed=config.seed)
