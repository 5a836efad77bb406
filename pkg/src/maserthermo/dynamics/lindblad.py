"""Rotating-frame Lindblad dynamics of the three-level maser.

Vectorization is column stacking in the (g, u, l) basis: vec(rho)[3*j + i] = rho[i, j],
so vec(A X B) = (B^T kron A) vec(X). The lab-frame H(t) is never integrated; all
dynamics run with the time-independent rotating-frame Hamiltonian.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.integrate import RK45

from maserthermo.config import DEFAULT_TOLERANCES, Tolerances
from maserthermo.core.params import (
    BATHS,
    DensityMatrix3,
    EngineParams,
    assert_physical,
    check_bath,
    detuning,
    sigma,
)
from maserthermo.errors import IntegrationError

log = logging.getLogger("lindblad")

VECTORIZATION = "column-stacked, basis (g, u, l)"
STEADY_RHS_THRESHOLD = 1e-12
STEADY_CONSECUTIVE_STEPS = 3

_EYE = np.eye(3, dtype=complex)


def _as_array(rho) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix3) else np.asarray(rho, dtype=complex)


def vectorize(rho) -> np.ndarray:
    return _as_array(rho).reshape(-1, order="F")


def unvectorize(vec: np.ndarray) -> np.ndarray:
    return np.asarray(vec).reshape(3, 3, order="F")


def rotating_hamiltonian(params: EngineParams) -> np.ndarray:
    """H~ = -Delta |u><u| + epsilon (|u><l| + |l><u|)."""
    return -detuning(params) * sigma("u", "u") + params.epsilon * (sigma("u", "l") + sigma("l", "u"))


def _jump_operators(alpha: str, params: EngineParams) -> list[tuple[float, np.ndarray]]:
    # (rate, operator): absorption |alpha><g| and emission |g><alpha|
    gamma, n = params.gamma(alpha), params.n(alpha)
    return [
        (gamma * n, sigma(alpha, "g")),
        (gamma * (n + 1.0), sigma("g", alpha)),
    ]


def _dissipate(op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    op_dag = op.conj().T
    number = op_dag @ op
    return op @ rho @ op_dag - 0.5 * (number @ rho + rho @ number)


def dissipator(rho, alpha: str, params: EngineParams) -> np.ndarray:
    check_bath(alpha)
    a = _as_array(rho)
    out = np.zeros((3, 3), dtype=complex)
    for rate, op in _jump_operators(alpha, params):
        out += rate * _dissipate(op, a)
    return out


def master_rhs(rho, params: EngineParams) -> np.ndarray:
    a = _as_array(rho)
    h = rotating_hamiltonian(params)
    out = -1j * (h @ a - a @ h)
    for alpha in BATHS:
        out += dissipator(a, alpha, params)
    return out


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray = field(repr=False)
    ordering: str = VECTORIZATION

    def apply(self, rho) -> np.ndarray:
        return unvectorize(self.matrix @ vectorize(rho))


def build_liouvillian(params: EngineParams) -> Liouvillian:
    h = rotating_hamiltonian(params)
    sup = -1j * (np.kron(_EYE, h) - np.kron(h.T, _EYE))
    for alpha in BATHS:
        for rate, op in _jump_operators(alpha, params):
            number = op.conj().T @ op
            sup = sup + rate * (
                np.kron(op.conj(), op)
                - 0.5 * np.kron(_EYE, number)
                - 0.5 * np.kron(number.T, _EYE)
            )
    sup.flags.writeable = False
    return Liouvillian(matrix=sup)


def relaxation_gap(liouvillian: Liouvillian) -> float:
    """Slowest nonzero decay rate: second-smallest |Re lambda| of the spectrum."""
    rates = np.sort(np.abs(np.linalg.eigvals(liouvillian.matrix).real))
    return float(rates[1])


def lab_frame_state(rho_rot, params: EngineParams, t: float) -> DensityMatrix3:
    """Undo the rotating-frame map U(t) = exp(iXt), X = w_l s_ll + (w_l + w_d) s_uu."""
    x = np.array([0.0, params.omega_l + params.omega_d, params.omega_l])
    phase = np.exp(1j * x * t)
    a = _as_array(rho_rot)
    return DensityMatrix3(phase.conj()[:, None] * a * phase[None, :])


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    stopped_early: bool = False

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[tuple[float, DensityMatrix3]]:
        for t, a in zip(self.times, self.states):
            yield float(t), DensityMatrix3(a)

    @property
    def final(self) -> DensityMatrix3:
        return DensityMatrix3(self.states[-1])

    @property
    def t_final(self) -> float:
        return float(self.times[-1])


def _stepper_tolerances(tolerances: Tolerances, atol: float) -> Tolerances:
    # an accepted step may carry local errors of order atol on each entry
    return tolerances.replace(
        hermiticity=max(tolerances.hermiticity, 10.0 * atol),
        trace=max(tolerances.trace, 10.0 * atol, tolerances.evolve / 10.0),
        psd=max(tolerances.psd, 1e3 * atol),
    )


def evolve(
    rho0,
    params: EngineParams,
    t_final: float,
    *,
    rtol: float | None = None,
    atol: float | None = None,
    first_step: float | None = None,
    max_step: float = np.inf,
    stop_at_steady_state: bool = True,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Trajectory:
    if t_final <= 0:
        raise IntegrationError(f"t_final must be positive, got {t_final}")
    rtol = tolerances.integrator_rtol if rtol is None else rtol
    atol = tolerances.integrator_atol if atol is None else atol
    check_tol = _stepper_tolerances(tolerances, atol)

    a0 = _as_array(rho0)
    report = assert_physical(a0, tolerances)
    if not report.passed:
        raise IntegrationError(f"initial state is not physical: {[c.line() for c in report.failures]}")

    sup = build_liouvillian(params).matrix

    def rhs(_t, y):
        return sup @ y

    solver = RK45(rhs, 0.0, vectorize(a0), t_final, rtol=rtol, atol=atol,
                  first_step=first_step, max_step=max_step)
    times = [0.0]
    states = [a0.copy()]
    quiet_steps = 0
    stopped_early = False

    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integrator failed at t={solver.t:.6g}: {message}")
        state = unvectorize(solver.y).copy()
        times.append(float(solver.t))
        states.append(state)

        check = assert_physical(state, check_tol)
        if not check.passed:
            raise IntegrationError(
                f"non-physical state at t={solver.t:.6g}: {[c.line() for c in check.failures]}"
            )

        if stop_at_steady_state:
            if np.max(np.abs(rhs(solver.t, solver.y))) < STEADY_RHS_THRESHOLD:
                quiet_steps += 1
                if quiet_steps >= STEADY_CONSECUTIVE_STEPS:
                    stopped_early = True
                    break
            else:
                quiet_steps = 0

    log.debug("evolve steps=%s t_end=%.6g stopped_early=%s", len(times) - 1, times[-1], stopped_early)
    return Trajectory(times=np.array(times), states=np.array(states), stopped_early=stopped_early)
