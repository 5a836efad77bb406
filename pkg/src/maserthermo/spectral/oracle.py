"""Broadened-level picture: spectral functions, Green's-function rate, mean energies.

Two width conventions meet here. The level spectral functions A_alpha carry the FWHM
gamma_alpha (1 + n_alpha). The Lorentzian-pair closed forms use half widths g_alpha with
FWHM 2 g_alpha. `to_lorentzian_pair` is the only place converting between them:
g_alpha = gamma_alpha (1 + n_alpha) / 2.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.integrate import quad

from maserthermo.core.params import EngineParams, check_bath, detuning
from maserthermo.errors import ParameterError, QuadratureError
from maserthermo.spectral.quadrature import DEFAULT_EPSREL, QuadratureResult, integrate_peaked


@dataclass(frozen=True)
class LorentzianPair:
    g_u: float
    g_l: float
    delta: float

    def __post_init__(self) -> None:
        if not self.g_u > 0:
            raise ParameterError("g_u must be strictly positive")
        if not self.g_l > 0:
            raise ParameterError("g_l must be strictly positive")


@dataclass(frozen=True)
class SpectralCheck:
    name: str
    closed_form: float
    quadrature: float

    @property
    def relative_deviation(self) -> float:
        if self.closed_form == 0:
            return abs(self.quadrature)
        return abs(self.quadrature - self.closed_form) / abs(self.closed_form)

    def passed(self, tol: float = 1e-8) -> bool:
        return self.relative_deviation < tol


def fwhm(alpha: str, params: EngineParams) -> float:
    check_bath(alpha)
    return params.gamma(alpha) * (1.0 + params.n(alpha))


def spectral_function(alpha: str, omega, params: EngineParams):
    width = fwhm(alpha, params)
    x = np.asarray(omega, dtype=float) - params.omega(alpha)
    value = width / (2.0 * math.pi) / (x * x + width * width / 4.0)
    return float(value) if np.ndim(value) == 0 else value


def spectral_normalization(alpha: str, params: EngineParams, cutoff: float = 200.0) -> SpectralCheck:
    """Integral of A_alpha over +-cutoff FWHM plus the analytic tail 1 - (2/pi) arctan(2 cutoff)."""
    width = fwhm(alpha, params)
    center = params.omega(alpha)
    result = quad(lambda w: spectral_function(alpha, w, params), center - cutoff * width, center + cutoff * width,
                  points=[center], epsabs=1e-14, epsrel=1e-12, limit=400, full_output=1)
    if len(result) == 4:
        raise QuadratureError(f"spectral normalization did not converge: {result[3]}")
    tail = 1.0 - 2.0 / math.pi * math.atan(2.0 * cutoff)
    return SpectralCheck(name=f"normalization_{alpha}", closed_form=1.0, quadrature=result[0] + tail)


def golden_rule_rate(omega, params: EngineParams):
    """Fermi golden-rule rate 2 pi eps^2 A_l(omega - omega_d) out of upper-level energy omega."""
    return 2.0 * math.pi * params.epsilon**2 * spectral_function("l", np.asarray(omega) - params.omega_d, params)


def to_lorentzian_pair(params: EngineParams) -> LorentzianPair:
    return LorentzianPair(
        g_u=fwhm("u", params) / 2.0,
        g_l=fwhm("l", params) / 2.0,
        delta=detuning(params),
    )


def _overlap_geometry(params: EngineParams) -> tuple[list[float], list[float]]:
    pair = to_lorentzian_pair(params)
    # A_u peaks at omega_u, A_l(omega - omega_d) at omega_l + omega_d = omega_u + Delta
    return [params.omega_u, params.omega_l + params.omega_d], [pair.g_u, pair.g_l]


def _overlap_density(omega: float, params: EngineParams) -> float:
    return spectral_function("u", omega, params) * spectral_function("l", omega - params.omega_d, params)


def overlap_integral(params: EngineParams, epsrel: float = DEFAULT_EPSREL) -> QuadratureResult:
    peaks, widths = _overlap_geometry(params)
    return integrate_peaked(lambda w: _overlap_density(w, params), peaks, widths, decay_order=4, epsrel=epsrel)


def greens_rate(params: EngineParams, population_difference: float, epsrel: float = DEFAULT_EPSREL) -> float:
    if population_difference == 0 or params.epsilon == 0:
        return 0.0
    overlap = overlap_integral(params, epsrel=epsrel).value
    return 2.0 * math.pi * params.epsilon**2 * population_difference * overlap


def mean_transition_energy_u(params: EngineParams, epsrel: float = DEFAULT_EPSREL) -> float:
    peaks, widths = _overlap_geometry(params)
    first = integrate_peaked(lambda w: w * _overlap_density(w, params), peaks, widths, decay_order=3, epsrel=epsrel)
    return first.value / overlap_integral(params, epsrel=epsrel).value


def mean_transition_energy_l(params: EngineParams, epsrel: float = DEFAULT_EPSREL) -> float:
    return mean_transition_energy_u(params, epsrel=epsrel) - params.omega_d


def lorentzian_product(omega, pair: LorentzianPair):
    w = np.asarray(omega, dtype=float)
    value = (1.0 / (2.0 * math.pi)) * (2.0 * pair.g_u / (w * w + pair.g_u**2)) * (
        2.0 * pair.g_l / ((w - pair.delta) ** 2 + pair.g_l**2)
    )
    return float(value) if np.ndim(value) == 0 else value


def lorentzian_overlap_closed(pair: LorentzianPair) -> float:
    s = pair.g_u + pair.g_l
    return 2.0 * s / (pair.delta**2 + s * s)


def lorentzian_first_moment_closed(pair: LorentzianPair) -> float:
    s = pair.g_u + pair.g_l
    return 2.0 * pair.g_u * pair.delta / (pair.delta**2 + s * s)


def lorentzian_overlap_quad(pair: LorentzianPair) -> float:
    return integrate_peaked(lambda w: lorentzian_product(w, pair), [0.0, pair.delta],
                            [pair.g_u, pair.g_l], decay_order=4).value


def lorentzian_first_moment_quad(pair: LorentzianPair) -> float:
    return integrate_peaked(lambda w: w * lorentzian_product(w, pair), [0.0, pair.delta],
                            [pair.g_u, pair.g_l], decay_order=3).value


def check_overlap(pair: LorentzianPair) -> SpectralCheck:
    return SpectralCheck("overlap", lorentzian_overlap_closed(pair), lorentzian_overlap_quad(pair))


def check_first_moment(pair: LorentzianPair) -> SpectralCheck:
    return SpectralCheck("first_moment", lorentzian_first_moment_closed(pair), lorentzian_first_moment_quad(pair))


def lorentzian_grid_checks(
    g_u_values: Iterable[float],
    g_l_values: Iterable[float],
    deltas: Iterable[float],
) -> list[SpectralCheck]:
    checks = []
    for g_u, g_l, delta in itertools.product(list(g_u_values), list(g_l_values), list(deltas)):
        pair = LorentzianPair(g_u, g_l, delta)
        checks.append(check_overlap(pair))
        checks.append(check_first_moment(pair))
    return checks
