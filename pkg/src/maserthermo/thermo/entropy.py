"""Bath temperatures, Spohn entropy production, von Neumann entropy and efficiency.

The von Neumann entropy is S = -Tr(rho ln rho). Some write it without the minus sign;
steady-state results are unaffected because only dS/dt enters the entropy production
and it vanishes in steady state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr

from maserthermo.core.params import DensityMatrix3, EngineParams, check_bath
from maserthermo.dynamics.lindblad import Trajectory
from maserthermo.dynamics.steady_state import rate_u_to_l
from maserthermo.errors import RegimeError, TemperatureConventionError, TrajectoryError
from maserthermo.thermo.flows import (
    FlowReport,
    bare_flows,
    bare_flows_from_state,
    effective_energies,
    full_flows,
)

NAIVE = "naive"
CORRECTED = "corrected"

SIGMA_BARE = "bare"
SIGMA_FULL_CORRECTED = "full_corrected"
SIGMA_FULL_NAIVE = "full_naive"
ENTROPY_CONVENTIONS = (SIGMA_BARE, SIGMA_FULL_CORRECTED, SIGMA_FULL_NAIVE)


def log_occupation_ratio(n: float) -> float:
    """log(1 + 1/n): the Boltzmann factor exponent of a bath with mean occupation n."""
    if n == 0:
        return math.inf
    return math.log1p(1.0 / n)


def _convention_energy(params: EngineParams, bath: str, convention: str) -> float:
    check_bath(bath)
    if convention == NAIVE:
        return params.omega(bath)
    if convention == CORRECTED:
        energy = effective_energies(params).omega(bath)
        if energy <= 0:
            raise TemperatureConventionError("effective energy nonpositive; temperature convention undefined")
        return energy
    raise TemperatureConventionError(f"unknown temperature convention {convention!r}")


def bath_temperature(params: EngineParams, bath: str, convention: str = NAIVE) -> float:
    energy = _convention_energy(params, bath, convention)
    n = params.n(bath)
    if n == 0:
        return 0.0
    ratio = log_occupation_ratio(n)
    if ratio == 0 or math.isinf(n):
        return math.inf
    temperature = energy / ratio
    return temperature if math.isfinite(temperature) else math.inf


def inverse_temperature(params: EngineParams, bath: str, convention: str = NAIVE) -> float:
    energy = _convention_energy(params, bath, convention)
    return log_occupation_ratio(params.n(bath)) / energy


def _heat_over_temperature(heat: float, temperature: float) -> float:
    if heat == 0 or math.isinf(temperature):
        return 0.0
    if temperature == 0:
        return math.copysign(math.inf, heat)
    return heat / temperature


@dataclass(frozen=True)
class EntropyReport:
    convention: str
    sigma: float
    temperature_u: float
    temperature_l: float
    heat_u: float
    heat_l: float
    entropy_rate: float = 0.0


def entropy_production(params: EngineParams, convention: str = SIGMA_BARE) -> EntropyReport:
    if convention == SIGMA_BARE:
        flows, temp_convention = bare_flows(params), NAIVE
    elif convention == SIGMA_FULL_CORRECTED:
        flows, temp_convention = full_flows(params), CORRECTED
    elif convention == SIGMA_FULL_NAIVE:
        flows, temp_convention = full_flows(params), NAIVE
    else:
        raise TemperatureConventionError(f"unknown entropy convention {convention!r}")

    t_u = bath_temperature(params, "u", temp_convention)
    t_l = bath_temperature(params, "l", temp_convention)
    r = rate_u_to_l(params)
    if r == 0:
        sigma = 0.0
    elif convention == SIGMA_BARE:
        sigma = r * (log_occupation_ratio(params.n_l) - log_occupation_ratio(params.n_u))
    else:
        sigma = -_heat_over_temperature(flows.heat_u, t_u) - _heat_over_temperature(flows.heat_l, t_l)
    return EntropyReport(
        convention=convention,
        sigma=sigma,
        temperature_u=t_u,
        temperature_l=t_l,
        heat_u=flows.heat_u,
        heat_l=flows.heat_l,
    )


def entropy_identity_residual(params: EngineParams) -> float:
    """|sigma_full_corrected - sigma_bare| relative to the entropy flux R (log ratio_u + log ratio_l).

    The flux scale bounds |sigma| from above and keeps the comparison meaningful when
    n_u and n_l nearly coincide and both sigmas cancel down to rounding.
    """
    bare = entropy_production(params, SIGMA_BARE).sigma
    corrected = entropy_production(params, SIGMA_FULL_CORRECTED).sigma
    if bare == corrected:
        return 0.0
    scale = abs(rate_u_to_l(params)) * (log_occupation_ratio(params.n_u) + log_occupation_ratio(params.n_l))
    if scale == 0 or not math.isfinite(scale):
        return math.inf
    return abs(corrected - bare) / scale


def von_neumann_entropy(rho) -> float:
    a = rho.data if isinstance(rho, DensityMatrix3) else np.asarray(rho, dtype=complex)
    eigenvalues = np.clip(np.linalg.eigvalsh(0.5 * (a + a.conj().T)), 0.0, 1.0)
    return float(np.sum(entr(eigenvalues)))


@dataclass(frozen=True)
class TransientEntropySeries:
    times: np.ndarray
    entropy: np.ndarray
    entropy_rate: np.ndarray
    sigma_bare: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def rows(self):
        return zip(self.times, self.entropy_rate, self.sigma_bare)


def transient_entropy_rate(trajectory: Trajectory, params: EngineParams) -> TransientEntropySeries:
    """dS/dt and bare entropy production along a trajectory.

    Only the bare convention is offered: the full flows rest on steady-state coherences.
    """
    if len(trajectory) < 3:
        raise TrajectoryError(f"need at least 3 samples for the entropy rate, got {len(trajectory)}")
    times = np.asarray(trajectory.times, dtype=float)
    entropy = np.array([von_neumann_entropy(a) for a in trajectory.states])
    # second-order centred differences on the actual timestamps, one-sided at the ends
    rate = np.gradient(entropy, times, edge_order=2)
    t_u = bath_temperature(params, "u", NAIVE)
    t_l = bath_temperature(params, "l", NAIVE)
    sigma = np.empty_like(rate)
    for k, a in enumerate(trajectory.states):
        flows: FlowReport = bare_flows_from_state(a, params)
        sigma[k] = rate[k] - _heat_over_temperature(flows.heat_u, t_u) - _heat_over_temperature(flows.heat_l, t_l)
    return TransientEntropySeries(times=times, entropy=entropy, entropy_rate=rate, sigma_bare=sigma)


@dataclass(frozen=True)
class EfficiencyReport:
    eta: float
    carnot_bound: float
    satisfied: bool
    naive_carnot_bound: float = math.nan
    naive_carnot_exceeded: bool = False


def _carnot_bound(params: EngineParams, convention: str) -> float:
    return 1.0 - bath_temperature(params, "l", convention) / bath_temperature(params, "u", convention)


def efficiency(params: EngineParams) -> EfficiencyReport:
    """eta = w_d / w~_u against Carnot bounds built from corrected and from naive temperatures.

    Only the corrected bound is a true limit. For Delta > 0 the naive bound can sit below eta,
    which is the efficiency-side face of a negative naive entropy production.
    """
    r = rate_u_to_l(params)
    if not r > 0:
        raise RegimeError(f"not in engine regime (R = {r:.6g})")
    eff = effective_energies(params)
    eta = params.omega_d / eff.omega_tilde_u
    bound = _carnot_bound(params, CORRECTED)
    naive_bound = _carnot_bound(params, NAIVE)
    return EfficiencyReport(
        eta=eta,
        carnot_bound=bound,
        satisfied=eta < bound,
        naive_carnot_bound=naive_bound,
        naive_carnot_exceeded=eta > naive_bound,
    )
