"""Steady state of the rotating-frame master equation, closed form and numerical."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.linalg import null_space, svd

from maserthermo.config import DEFAULT_TOLERANCES, Tolerances
from maserthermo.core.params import CheckResult, DensityMatrix3, EngineParams, detuning
from maserthermo.dynamics.lindblad import build_liouvillian, master_rhs, unvectorize
from maserthermo.errors import SteadyStateError

log = logging.getLogger("steady_state")

# relative threshold below which a singular value of the Liouvillian counts as zero
NULL_SINGULAR_RTOL = 1e-10


@dataclass(frozen=True)
class SteadyState:
    rho_gg: float
    rho_uu: float
    rho_ll: float
    rho_ul: complex
    source: str
    full: np.ndarray | None = field(default=None, repr=False, compare=False)
    hermitization_residual: float = 0.0

    @property
    def population_difference(self) -> float:
        return self.rho_uu - self.rho_ll

    def matrix(self) -> np.ndarray:
        if self.full is not None:
            return self.full.copy()
        m = np.zeros((3, 3), dtype=complex)
        m[0, 0] = self.rho_gg
        m[1, 1] = self.rho_uu
        m[2, 2] = self.rho_ll
        m[1, 2] = self.rho_ul
        m[2, 1] = np.conj(self.rho_ul)
        return m

    def density(self) -> DensityMatrix3:
        return DensityMatrix3(self.matrix())

    def deviation(self, other: "SteadyState") -> float:
        return float(np.max(np.abs(self.matrix() - other.matrix())))

    @classmethod
    def from_matrix(cls, rho, source: str, hermitization_residual: float = 0.0) -> "SteadyState":
        a = rho.data if isinstance(rho, DensityMatrix3) else np.asarray(rho, dtype=complex)
        a = np.array(a, dtype=complex)
        a.flags.writeable = False
        return cls(
            rho_gg=float(a[0, 0].real),
            rho_uu=float(a[1, 1].real),
            rho_ll=float(a[2, 2].real),
            rho_ul=complex(a[1, 2]),
            source=source,
            full=a,
            hermitization_residual=hermitization_residual,
        )


def _total_width(params: EngineParams) -> float:
    return params.decay_width("u") + params.decay_width("l")


def coherence_factor_C(params: EngineParams) -> float:
    g = _total_width(params)
    delta = detuning(params)
    return params.epsilon**2 * g / (g * g / 4.0 + delta * delta)


def af_coefficients(params: EngineParams) -> tuple[float, float]:
    gu, gl, nu, nl = params.gamma_u, params.gamma_l, params.n_u, params.n_l
    g = _total_width(params)
    delta = detuning(params)
    eps2 = params.epsilon**2
    a = gu * gl / 4.0 * g * eps2
    f = (
        g / 2.0 * (gu * (3 * nu + 1) + gl * (3 * nl + 1)) / 2.0 * eps2
        + gu * gl / 4.0 * (3 * nu * nl + 2 * nu + 2 * nl + 1) * (g * g / 4.0 + delta * delta)
    )
    return a, f


def rate_u_to_l(params: EngineParams) -> float:
    a, f = af_coefficients(params)
    return a / f * (params.n_u - params.n_l)


def population_difference(params: EngineParams) -> float:
    """rho_uu - rho_ll in steady state, proportional to n_u - n_l."""
    gu, gl, nu, nl = params.gamma_u, params.gamma_l, params.n_u, params.n_l
    c = coherence_factor_C(params)
    den = gu * gl * (3 * nu * nl + 2 * nu + 2 * nl + 1) + c * (gu * (3 * nu + 1) + gl * (3 * nl + 1))
    return gu * gl * (nu - nl) / den


def coherence_from_populations(params: EngineParams, diff: float) -> complex:
    g = _total_width(params)
    return -params.epsilon * diff / complex(detuning(params), g / 2.0)


def rate_from_coherence(params: EngineParams, rho_ul: complex) -> float:
    # -i eps (rho_ul - rho_ul*) = 2 eps Im rho_ul
    return float((-1j * params.epsilon * (rho_ul - np.conj(rho_ul))).real)


def analytic_steady_state(params: EngineParams) -> SteadyState:
    gu, gl, nu, nl = params.gamma_u, params.gamma_l, params.n_u, params.n_l
    c = coherence_factor_C(params)
    den = (gl * (2 * nl + 1) + c) * (gu * (2 * nu + 1) + c) - (gl * nl - c) * (gu * nu - c)
    if not den > 0:
        raise SteadyStateError(f"steady-state denominator is not positive: {den!r}")
    common = c * (gu * nu + gl * nl)
    rho_uu = (gu * gl * nu * (nl + 1) + common) / den
    rho_ll = (gu * gl * nl * (nu + 1) + common) / den
    rho_gg = 1.0 - rho_uu - rho_ll
    rho_ul = coherence_from_populations(params, population_difference(params))
    return SteadyState(rho_gg=rho_gg, rho_uu=rho_uu, rho_ll=rho_ll, rho_ul=rho_ul, source="analytic")


def nullspace_steady_state(params: EngineParams) -> SteadyState:
    liouvillian = build_liouvillian(params)
    _, s, vh = svd(liouvillian.matrix)
    null_tol = NULL_SINGULAR_RTOL * s[0]
    smallest = (float(s[-1]), float(s[-2]))
    if s[-1] > null_tol or s[-2] <= null_tol:
        dim = int(np.sum(s <= null_tol))
        raise SteadyStateError(
            f"Liouvillian null space has dimension {dim}, expected 1 "
            f"(smallest singular values {smallest[0]:.3e}, {smallest[1]:.3e})",
            singular_values=smallest,
        )
    m = unvectorize(vh[-1].conj())
    m = m / np.trace(m)
    residual = float(np.max(np.abs(m - m.conj().T)))
    rho = 0.5 * (m + m.conj().T)
    rho = rho / np.trace(rho).real
    log.debug("nullspace steady state s_min=%.3e s_next=%.3e herm_residual=%.3e", *smallest, residual)
    return SteadyState.from_matrix(rho, source="nullspace", hermitization_residual=residual)


def classical_rate_matrix(params: EngineParams) -> np.ndarray:
    """Population rate equations at epsilon = 0, acting on (rho_gg, rho_uu, rho_ll)."""
    gu, gl, nu, nl = params.gamma_u, params.gamma_l, params.n_u, params.n_l
    return np.array([
        [-(gu * nu + gl * nl), gu * (nu + 1), gl * (nl + 1)],
        [gu * nu, -gu * (nu + 1), 0.0],
        [gl * nl, 0.0, -gl * (nl + 1)],
    ])


def classical_steady_populations(params: EngineParams) -> np.ndarray:
    ns = null_space(classical_rate_matrix(params))
    if ns.shape[1] != 1:
        raise SteadyStateError(f"classical rate matrix null space has dimension {ns.shape[1]}")
    p = ns[:, 0]
    return p / p.sum()


def rate_saturation_profile(params: EngineParams, epsilons: Iterable[float]) -> tuple[np.ndarray, np.ndarray]:
    eps = np.asarray(list(epsilons), dtype=float)
    rates = np.array([rate_u_to_l(params.with_changes(epsilon=e)) for e in eps])
    return eps**2, rates


def steady_state_checks(ss: SteadyState, params: EngineParams, tolerances: Tolerances = DEFAULT_TOLERANCES) -> tuple[CheckResult, ...]:
    norm = abs(ss.rho_gg + ss.rho_uu + ss.rho_ll - 1.0)
    block = max(0.0, abs(ss.rho_ul) ** 2 - ss.rho_uu * ss.rho_ll)
    rhs = float(np.max(np.abs(master_rhs(ss.matrix(), params))))
    return (
        CheckResult("normalization", norm <= 1e-12, norm, 1e-12),
        CheckResult("coherence_bound", block <= 1e-12, block, 1e-12),
        CheckResult("stationarity", rhs < tolerances.steady_state * 0.1, rhs, tolerances.steady_state * 0.1),
    )
