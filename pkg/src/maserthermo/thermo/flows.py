"""Power and heat flows under the bare and the full (time-dependent H) conventions.

Sign convention: positive values are energy entering the three-level system.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from maserthermo.core.params import DensityMatrix3, EngineParams, detuning
from maserthermo.dynamics.steady_state import SteadyState, rate_u_to_l

log = logging.getLogger("thermo")

BARE = "bare"
FULL = "full"


@dataclass(frozen=True)
class FlowReport:
    convention: str
    power: float
    heat_u: float
    heat_l: float

    @property
    def total(self) -> float:
        return self.power + self.heat_u + self.heat_l

    @property
    def conservation_residual(self) -> float:
        """|P + Q_u + Q_l| relative to the largest of the three magnitudes."""
        scale = max(abs(self.power), abs(self.heat_u), abs(self.heat_l))
        return abs(self.total) / scale if scale > 0 else 0.0

    def is_conserved(self, tol: float = 1e-10) -> bool:
        return self.conservation_residual <= tol


@dataclass(frozen=True)
class EffectiveEnergies:
    omega_tilde_u: float
    omega_tilde_l: float
    weight_denominator: float

    @property
    def valid_for_temperature(self) -> bool:
        return self.omega_tilde_u > 0 and self.omega_tilde_l > 0

    def omega(self, alpha: str) -> float:
        return self.omega_tilde_u if alpha == "u" else self.omega_tilde_l


def effective_energies(params: EngineParams) -> EffectiveEnergies:
    weight_u = params.decay_width("u")
    weight_l = params.decay_width("l")
    g = weight_u + weight_l
    delta = detuning(params)
    eff = EffectiveEnergies(
        omega_tilde_u=params.omega_u + delta * weight_u / g,
        omega_tilde_l=params.omega_l - delta * weight_l / g,
        weight_denominator=g,
    )
    if not eff.valid_for_temperature:
        log.warning(
            "nonpositive effective energy (%.6g, %.6g); corrected temperatures are undefined",
            eff.omega_tilde_u, eff.omega_tilde_l,
        )
    return eff


def bare_flows(params: EngineParams) -> FlowReport:
    r = rate_u_to_l(params)
    return FlowReport(
        convention=BARE,
        power=-r * (params.omega_u - params.omega_l),
        heat_u=r * params.omega_u,
        heat_l=-r * params.omega_l,
    )


def full_flows(params: EngineParams) -> FlowReport:
    r = rate_u_to_l(params)
    eff = effective_energies(params)
    return FlowReport(
        convention=FULL,
        power=-r * params.omega_d,
        heat_u=r * eff.omega_tilde_u,
        heat_l=-r * eff.omega_tilde_l,
    )


def power_discrepancy(params: EngineParams) -> float:
    """P_0 - P = R * Delta: work misbooked by pricing photons at w_u - w_l instead of w_d."""
    return rate_u_to_l(params) * detuning(params)


def _matrix(rho) -> np.ndarray:
    if isinstance(rho, SteadyState):
        return rho.matrix()
    if isinstance(rho, DensityMatrix3):
        return rho.data
    return np.asarray(rho, dtype=complex)


def _bare_heat(a: np.ndarray, alpha: str, params: EngineParams) -> float:
    idx = 1 if alpha == "u" else 2
    gamma, n = params.gamma(alpha), params.n(alpha)
    return params.omega(alpha) * (gamma * n * a[0, 0].real - gamma * (n + 1.0) * a[idx, idx].real)


def bare_flows_from_state(rho, params: EngineParams) -> FlowReport:
    """Instantaneous bare flows from the state; valid along transients as well."""
    a = _matrix(rho)
    return FlowReport(
        convention=BARE,
        power=-2.0 * params.epsilon * (params.omega_u - params.omega_l) * a[1, 2].imag,
        heat_u=_bare_heat(a, "u", params),
        heat_l=_bare_heat(a, "l", params),
    )


def full_flows_from_state(rho_ss, params: EngineParams) -> FlowReport:
    """Full flows from the rotating-frame coherence. Meaningful at steady state only."""
    a = _matrix(rho_ss)
    coherence_re = a[1, 2].real
    eps = params.epsilon
    return FlowReport(
        convention=FULL,
        power=-2.0 * eps * params.omega_d * a[1, 2].imag,
        heat_u=_bare_heat(a, "u", params) - eps * params.decay_width("u") * coherence_re,
        heat_l=_bare_heat(a, "l", params) - eps * params.decay_width("l") * coherence_re,
    )
