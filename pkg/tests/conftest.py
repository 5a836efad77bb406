from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st


ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from maserthermo.core.params import BENCHMARK_PARAMS, EngineParams  # noqa: E402


@pytest.fixture
def benchmark_params() -> EngineParams:
    return BENCHMARK_PARAMS


@pytest.fixture
def violation_params() -> EngineParams:
    return EngineParams(
        omega_u=10.0, omega_l=5.0, omega_d=6.0, epsilon=0.5,
        gamma_u=1.0, gamma_l=1.0, n_u=1.1, n_l=1.0,
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def _log_uniform(low: float, high: float):
    return st.floats(np.log(low), np.log(high)).map(lambda x: float(np.exp(x)))


def _occupation(n_max: float):
    # exact zero-temperature baths, otherwise clear of subnormal occupations
    return st.one_of(st.just(0.0), st.floats(1e-6, n_max))


@st.composite
def engine_params(draw, n_max: float = 10.0, delta_max: float = 10.0) -> EngineParams:
    omega_l = draw(st.floats(1.0, 10.0))
    omega_u = draw(st.floats(omega_l + 1e-3, 20.0).filter(lambda w: w > omega_l))
    delta = draw(st.floats(-delta_max, delta_max))
    omega_d = omega_u - omega_l + delta
    if omega_d <= 0:
        omega_d = omega_u - omega_l
    return EngineParams(
        omega_u=omega_u,
        omega_l=omega_l,
        omega_d=omega_d,
        epsilon=draw(_log_uniform(1e-3, 10.0)),
        gamma_u=draw(_log_uniform(1e-2, 1e2)),
        gamma_l=draw(_log_uniform(1e-2, 1e2)),
        n_u=draw(_occupation(n_max)),
        n_l=draw(_occupation(n_max)),
    )


def random_params(rng: np.random.Generator, delta_max: float = 10.0) -> EngineParams:
    """Seeded draw over the acceptance-campaign domain; omega_d > 0 enforced by redraw of delta."""
    omega_l = rng.uniform(1.0, 10.0)
    omega_u = rng.uniform(omega_l, 20.0)
    while omega_u <= omega_l:
        omega_u = rng.uniform(omega_l, 20.0)
    delta = rng.uniform(-delta_max, delta_max)
    while omega_u - omega_l + delta <= 0:
        delta = rng.uniform(-delta_max, delta_max)
    return EngineParams(
        omega_u=float(omega_u),
        omega_l=float(omega_l),
        omega_d=float(omega_u - omega_l + delta),
        epsilon=float(np.exp(rng.uniform(np.log(1e-3), np.log(10.0)))),
        gamma_u=float(np.exp(rng.uniform(np.log(1e-2), np.log(1e2)))),
        gamma_l=float(np.exp(rng.uniform(np.log(1e-2), np.log(1e2)))),
        n_u=float(rng.uniform(0.0, 10.0)),
        n_l=float(rng.uniform(0.0, 10.0)),
    )
