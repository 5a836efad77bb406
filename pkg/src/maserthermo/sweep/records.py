from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, fields

from maserthermo.config import DEFAULT_TOLERANCES, Tolerances
from maserthermo.core.params import EngineParams, detuning, relative_difference, validate
from maserthermo.dynamics import steady_state
from maserthermo.errors import MaserError, PointEvaluationError, TemperatureConventionError
from maserthermo.spectral import oracle
from maserthermo.thermo import entropy, flows

log = logging.getLogger("sweep")

NAIVE_VIOLATION_THRESHOLD = -1e-12


@dataclass(frozen=True)
class PointRecord:
    omega_u: float
    omega_l: float
    omega_d: float
    epsilon: float
    gamma_u: float
    gamma_l: float
    n_u: float
    n_l: float
    delta: float
    rate: float
    coeff_a: float
    coeff_f: float
    coeff_c: float
    rho_gg: float
    rho_uu: float
    rho_ll: float
    rho_ul_re: float
    rho_ul_im: float
    power_bare: float
    heat_u_bare: float
    heat_l_bare: float
    power_full: float
    heat_u_full: float
    heat_l_full: float
    power_discrepancy: float
    omega_tilde_u: float
    omega_tilde_l: float
    temp_u: float
    temp_l: float
    temp_tilde_u: float | None
    temp_tilde_l: float | None
    sigma_bare: float
    sigma_full_corrected: float | None
    sigma_full_naive: float
    eta: float | None
    carnot_bound: float | None
    naive_carnot_bound: float | None
    naive_carnot_exceeded: bool | None
    naive_violation: bool
    ok_conservation_bare: bool
    ok_conservation_full: bool
    ok_energy_identity: bool
    ok_sigma_nonnegative: bool
    ok_sigma_identity: bool | None
    ok_carnot: bool | None
    ok_steady_state: bool | None = None
    ok_greens_rate: bool | None = None
    ok_mean_energy: bool | None = None
    mean_energy_u_quad: float | None = None

    @property
    def params(self) -> EngineParams:
        return EngineParams(**{f.name: getattr(self, f.name) for f in fields(EngineParams)})

    @property
    def invariant_flags(self) -> dict[str, bool | None]:
        return {k: v for k, v in asdict(self).items() if k.startswith("ok_")}

    @property
    def invariant_failures(self) -> list[str]:
        return [k for k, v in self.invariant_flags.items() if v is False]

    def as_row(self) -> dict:
        return asdict(self)


COLUMNS = tuple(f.name for f in fields(PointRecord))


def _verify_fields(params: EngineParams, eff: flows.EffectiveEnergies, tol: Tolerances) -> dict:
    analytic = steady_state.analytic_steady_state(params)
    numeric = steady_state.nullspace_steady_state(params)
    diff = analytic.population_difference
    greens = oracle.greens_rate(params, diff)
    mean_u = oracle.mean_transition_energy_u(params)
    ok_greens = relative_difference(greens, steady_state.coherence_factor_C(params) * diff) <= tol.quadrature
    return {
        "ok_steady_state": bool(analytic.deviation(numeric) <= tol.steady_state),
        "ok_greens_rate": bool(ok_greens),
        "ok_mean_energy": bool(relative_difference(mean_u, eff.omega_tilde_u) <= tol.quadrature),
        "mean_energy_u_quad": mean_u,
    }


def eval_point(params: EngineParams, *, verify: bool = False, tolerances: Tolerances = DEFAULT_TOLERANCES) -> PointRecord:
    validate(params)
    try:
        return _eval_point(params, verify, tolerances)
    except MaserError as exc:
        if isinstance(exc, PointEvaluationError):
            raise
        raise PointEvaluationError(f"{type(exc).__name__}: {exc}", params=params) from exc


def _eval_point(params: EngineParams, verify: bool, tol: Tolerances) -> PointRecord:
    a, f = steady_state.af_coefficients(params)
    rate = steady_state.rate_u_to_l(params)
    ss = steady_state.analytic_steady_state(params)
    bare = flows.bare_flows(params)
    full = flows.full_flows(params)
    eff = flows.effective_energies(params)

    sigma_bare = entropy.entropy_production(params, entropy.SIGMA_BARE).sigma
    sigma_naive = entropy.entropy_production(params, entropy.SIGMA_FULL_NAIVE).sigma

    temp_tilde_u = temp_tilde_l = sigma_corrected = None
    ok_identity = None
    if eff.valid_for_temperature:
        try:
            temp_tilde_u = entropy.bath_temperature(params, "u", entropy.CORRECTED)
            temp_tilde_l = entropy.bath_temperature(params, "l", entropy.CORRECTED)
            sigma_corrected = entropy.entropy_production(params, entropy.SIGMA_FULL_CORRECTED).sigma
            ok_identity = bool(entropy.entropy_identity_residual(params) <= tol.identity)
        except TemperatureConventionError as exc:
            log.debug("corrected convention undefined at %s: %s", params, exc)

    eta = bound = naive_bound = None
    ok_carnot = naive_exceeded = None
    if rate > 0 and eff.valid_for_temperature:
        report = entropy.efficiency(params)
        eta, bound, ok_carnot = report.eta, report.carnot_bound, bool(report.satisfied)
        naive_bound, naive_exceeded = report.naive_carnot_bound, bool(report.naive_carnot_exceeded)

    energy_scale = max(abs(eff.omega_tilde_u), abs(params.omega_d), 1.0)
    record = dict(
        **params.as_dict(),
        delta=detuning(params),
        rate=rate,
        coeff_a=a,
        coeff_f=f,
        coeff_c=steady_state.coherence_factor_C(params),
        rho_gg=ss.rho_gg,
        rho_uu=ss.rho_uu,
        rho_ll=ss.rho_ll,
        rho_ul_re=ss.rho_ul.real,
        rho_ul_im=ss.rho_ul.imag,
        power_bare=bare.power,
        heat_u_bare=bare.heat_u,
        heat_l_bare=bare.heat_l,
        power_full=full.power,
        heat_u_full=full.heat_u,
        heat_l_full=full.heat_l,
        power_discrepancy=flows.power_discrepancy(params),
        omega_tilde_u=eff.omega_tilde_u,
        omega_tilde_l=eff.omega_tilde_l,
        temp_u=entropy.bath_temperature(params, "u", entropy.NAIVE),
        temp_l=entropy.bath_temperature(params, "l", entropy.NAIVE),
        temp_tilde_u=temp_tilde_u,
        temp_tilde_l=temp_tilde_l,
        sigma_bare=sigma_bare,
        sigma_full_corrected=sigma_corrected,
        sigma_full_naive=sigma_naive,
        eta=eta,
        carnot_bound=bound,
        naive_carnot_bound=naive_bound,
        naive_carnot_exceeded=naive_exceeded,
        naive_violation=bool(rate > 0 and sigma_naive < NAIVE_VIOLATION_THRESHOLD),
        ok_conservation_bare=bool(bare.is_conserved(tol.conservation)),
        ok_conservation_full=bool(full.is_conserved(tol.conservation)),
        ok_energy_identity=bool(abs(eff.omega_tilde_u - eff.omega_tilde_l - params.omega_d) <= tol.identity * energy_scale),
        ok_sigma_nonnegative=bool(sigma_bare >= 0),
        ok_sigma_identity=ok_identity,
        ok_carnot=ok_carnot,
    )
    if verify:
        record.update(_verify_fields(params, eff, tol))
    return PointRecord(**record)
