"""Aggregated invariant report for one parameter set."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from maserthermo.config import DEFAULT_TOLERANCES, Tolerances
from maserthermo.core.params import (
    CheckResult,
    DensityMatrix3,
    EngineParams,
    assert_physical,
    relative_difference,
    validate,
)
from maserthermo.dynamics import lindblad, steady_state
from maserthermo.errors import IntegrationError, MaserError, QuadratureError
from maserthermo.spectral import oracle
from maserthermo.thermo import entropy, flows

log = logging.getLogger("verify")

# decay e-folds of the slowest mode before the evolved state is compared
SETTLE_EFOLDS = 25.0
# t_final times the Liouvillian spectral radius; bounds the explicit step count
MAX_STIFFNESS = 1e6
TRAJECTORY_CHECKS = ("evolve_convergence", "evolve_trace", "transient_sigma_nonnegative", "transient_sigma_converges")


@dataclass(frozen=True)
class VerificationReport:
    params: EngineParams
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def render(self) -> str:
        lines = [c.line() for c in self.checks]
        status = "PASS" if self.passed else "FAIL"
        lines.append(f"{status}: {len(self.checks) - len(self.failures)}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def _check(name: str, residual: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(residual <= tol), float(residual), tol, detail=detail)


def _flux_scale(params: EngineParams) -> float:
    return params.omega_u * max(params.decay_width("u"), params.decay_width("l"))


def _flow_gap(a: flows.FlowReport, b: flows.FlowReport) -> float:
    return max(abs(a.power - b.power), abs(a.heat_u - b.heat_u), abs(a.heat_l - b.heat_l))


def _steady_state_checks(params: EngineParams, tol: Tolerances) -> list[CheckResult]:
    analytic = steady_state.analytic_steady_state(params)
    numeric = steady_state.nullspace_steady_state(params)
    out = [_check("analytic_vs_nullspace", analytic.deviation(numeric), tol.steady_state)]
    out += list(steady_state.steady_state_checks(analytic, params, tol))
    physical = assert_physical(numeric.density(), tol)
    out += [CheckResult(f"nullspace_{c.name}", c.passed, c.residual, c.tolerance, c.detail) for c in physical.checks]
    return out


def trajectory_feasibility(params: EngineParams, tol: Tolerances) -> tuple[float, str]:
    """t_final for the convergence run, plus a reason string when the run cannot meet tol.evolve."""
    liouvillian = lindblad.build_liouvillian(params)
    gap = lindblad.relaxation_gap(liouvillian)
    radius = float(np.abs(np.linalg.eigvals(liouvillian.matrix)).max())
    t_final = SETTLE_EFOLDS / gap
    if lindblad.STEADY_RHS_THRESHOLD / gap > tol.evolve:
        return t_final, f"early-stop threshold coarser than tolerance (gap={gap:.3e})"
    if t_final * radius > MAX_STIFFNESS:
        return t_final, f"relaxation too slow for an explicit trajectory (gap={gap:.3e}, radius={radius:.3e})"
    return t_final, ""


def _dynamics_checks(params: EngineParams, tol: Tolerances) -> list[CheckResult]:
    analytic = steady_state.analytic_steady_state(params)
    t_final, reason = trajectory_feasibility(params, tol)
    if reason:
        return [CheckResult.skip(name, reason) for name in TRAJECTORY_CHECKS]
    try:
        traj = lindblad.evolve(DensityMatrix3.projector("g"), params, t_final, tolerances=tol)
    except IntegrationError as exc:
        return [CheckResult("evolve_convergence", False, math.inf, tol.evolve, detail=str(exc))]

    final = traj.final.data
    out = [
        _check("evolve_convergence", float(np.max(np.abs(final - analytic.matrix()))), tol.evolve,
               detail=f"t_final={traj.t_final:.4g} steps={len(traj) - 1}"),
        _check("evolve_trace", abs(np.trace(final).real - 1.0), tol.trace),
    ]
    if len(traj) < 3:
        out += [CheckResult.skip(name, "fewer than 3 accepted steps") for name in TRAJECTORY_CHECKS[2:]]
        return out
    series = entropy.transient_entropy_rate(traj, params)
    sigma_0 = entropy.entropy_production(params, entropy.SIGMA_BARE).sigma
    out.append(_check("transient_sigma_nonnegative", max(0.0, -float(series.sigma_bare.min())), tol.transient))
    if min(params.n_u, params.n_l) == 0:
        # heat into a zero-temperature bath carries an unbounded entropy flux
        out.append(CheckResult.skip("transient_sigma_converges", "zero-temperature bath; entropy flux unbounded"))
    else:
        out.append(_check("transient_sigma_converges", abs(float(series.sigma_bare[-1]) - sigma_0),
                          tol.transient_convergence))
    return out


def _flow_checks(params: EngineParams, tol: Tolerances) -> list[CheckResult]:
    bare = flows.bare_flows(params)
    full = flows.full_flows(params)
    ss = steady_state.analytic_steady_state(params)
    scale = _flux_scale(params)
    eff = flows.effective_energies(params)
    energy_scale = max(abs(eff.omega_tilde_u), abs(params.omega_d), 1.0)
    return [
        _check("conservation_bare", bare.conservation_residual, tol.conservation),
        _check("conservation_full", full.conservation_residual, tol.conservation),
        _check("bare_flows_from_state", _flow_gap(flows.bare_flows_from_state(ss, params), bare) / scale,
               tol.steady_state),
        _check("full_flows_from_state", _flow_gap(flows.full_flows_from_state(ss, params), full) / scale,
               tol.steady_state),
        _check("energy_identity",
               abs(eff.omega_tilde_u - eff.omega_tilde_l - params.omega_d) / energy_scale, tol.identity),
    ]


def _entropy_checks(params: EngineParams, tol: Tolerances) -> list[CheckResult]:
    sigma_bare = entropy.entropy_production(params, entropy.SIGMA_BARE).sigma
    out = [_check("sigma_nonnegative", max(0.0, -sigma_bare), 0.0, detail=f"sigma_bare={sigma_bare:.6g}")]
    eff = flows.effective_energies(params)
    if not eff.valid_for_temperature:
        reason = "effective energy nonpositive; temperature convention undefined"
        out.append(CheckResult.skip("sigma_identity", reason))
        out.append(CheckResult.skip("carnot", reason))
        return out
    out.append(_check("sigma_identity", entropy.entropy_identity_residual(params), tol.identity))
    if steady_state.rate_u_to_l(params) > 0:
        report = entropy.efficiency(params)
        out.append(CheckResult("carnot", report.satisfied, max(0.0, report.eta - report.carnot_bound), 0.0,
                               detail=f"eta={report.eta:.6g} bound={report.carnot_bound:.6g}"))
    else:
        out.append(CheckResult.skip("carnot", "not in engine regime"))
    return out


def _spectral_checks(params: EngineParams, tol: Tolerances) -> list[CheckResult]:
    try:
        d = steady_state.analytic_steady_state(params).population_difference
        greens = oracle.greens_rate(params, d)
        expected = steady_state.coherence_factor_C(params) * d
        mean_u = oracle.mean_transition_energy_u(params)
        out = [
            _check("greens_rate", relative_difference(greens, expected), tol.quadrature),
            _check("mean_energy_u", relative_difference(mean_u, flows.effective_energies(params).omega_tilde_u),
                   tol.quadrature),
        ]
        for alpha in ("u", "l"):
            norm = oracle.spectral_normalization(alpha, params)
            out.append(_check(norm.name, norm.relative_deviation, tol.quadrature))
        return out
    except QuadratureError as exc:
        return [CheckResult("spectral", False, math.inf, tol.quadrature, detail=str(exc))]


def verify_all(params: EngineParams, tolerances: Tolerances = DEFAULT_TOLERANCES) -> VerificationReport:
    validate(params)
    checks: list[CheckResult] = []
    for group in (_steady_state_checks, _dynamics_checks, _flow_checks, _entropy_checks, _spectral_checks):
        try:
            checks += group(params, tolerances)
        except MaserError as exc:
            log.warning("%s raised %s: %s", group.__name__, type(exc).__name__, exc)
            checks.append(CheckResult(group.__name__.strip("_"), False, math.inf, 0.0, detail=str(exc)))
    report = VerificationReport(params=params, checks=tuple(checks))
    log.info("Verification %s. checks=%s failures=%s", "passed" if report.passed else "failed",
             len(report.checks), len(report.failures))
    return report
