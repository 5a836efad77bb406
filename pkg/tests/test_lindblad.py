from __future__ import annotations

import numpy as np
import pytest

from maserthermo.core.params import DensityMatrix3, sigma
from maserthermo.dynamics.lindblad import (
    Trajectory,
    build_liouvillian,
    dissipator,
    evolve,
    lab_frame_state,
    master_rhs,
    relaxation_gap,
    rotating_hamiltonian,
    unvectorize,
    vectorize,
)
from maserthermo.dynamics.steady_state import analytic_steady_state, nullspace_steady_state
from maserthermo.errors import BathLabelError, IntegrationError


def _random_density(rng) -> np.ndarray:
    z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = z @ z.conj().T
    return m / np.trace(m)


def test_vectorization_is_column_stacking():
    a = np.arange(9).reshape(3, 3)
    assert list(vectorize(a).real) == [0, 3, 6, 1, 4, 7, 2, 5, 8]
    assert np.array_equal(unvectorize(vectorize(a)), a)


def test_rotating_hamiltonian_entries(benchmark_params):
    h = rotating_hamiltonian(benchmark_params)
    assert h[1, 1] == pytest.approx(-0.5)
    assert h[1, 2] == h[2, 1] == pytest.approx(0.5)
    assert h[0, 0] == 0 and h[2, 2] == 0


def test_dissipator_on_upper_projector(benchmark_params):
    # emission only: gamma_u (n_u + 1) (|g><g| - |u><u|)
    out = dissipator(sigma("u", "u"), "u", benchmark_params)
    expected = 3.0 * (sigma("g", "g") - sigma("u", "u"))
    assert np.allclose(out, expected, atol=1e-15)
    assert np.allclose(dissipator(sigma("u", "u"), "l", benchmark_params), 0.0)


def test_dissipator_on_ground_projector(benchmark_params):
    # absorption only: gamma_l n_l (|l><l| - |g><g|)
    out = dissipator(sigma("g", "g"), "l", benchmark_params)
    assert np.allclose(out, 1.0 * (sigma("l", "l") - sigma("g", "g")), atol=1e-15)


def test_dissipator_rejects_unknown_bath(benchmark_params):
    with pytest.raises(BathLabelError):
        dissipator(sigma("g", "g"), "g", benchmark_params)


def test_liouvillian_matches_direct_rhs(benchmark_params, rng):
    lv = build_liouvillian(benchmark_params)
    assert lv.matrix.shape == (9, 9)
    for _ in range(5):
        rho = _random_density(rng)
        assert np.allclose(lv.apply(rho), master_rhs(rho, benchmark_params), atol=1e-13)


def test_rhs_is_traceless_and_hermitian(benchmark_params, rng):
    rho = _random_density(rng)
    out = master_rhs(rho, benchmark_params)
    assert abs(np.trace(out)) < 1e-13
    assert np.allclose(out, out.conj().T, atol=1e-13)


def test_analytic_state_is_in_the_kernel(benchmark_params):
    lv = build_liouvillian(benchmark_params)
    rho = analytic_steady_state(benchmark_params).matrix()
    assert np.max(np.abs(lv.apply(rho))) < 1e-12


def test_relaxation_gap_is_positive(benchmark_params):
    gap = relaxation_gap(build_liouvillian(benchmark_params))
    assert 0.0 < gap < 10.0


def test_evolve_converges_to_analytic_steady_state(benchmark_params):
    gap = relaxation_gap(build_liouvillian(benchmark_params))
    traj = evolve(DensityMatrix3.projector("g"), benchmark_params, 25.0 / gap)
    expected = analytic_steady_state(benchmark_params).matrix()
    assert np.max(np.abs(traj.final.data - expected)) < 1e-8
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[0] == 0.0


def test_evolve_keeps_every_state_physical(benchmark_params):
    traj = evolve(DensityMatrix3.pure([0.3, 1.0, 0.5j]), benchmark_params, 5.0, stop_at_steady_state=False)
    assert traj.t_final == pytest.approx(5.0)
    assert not traj.stopped_early
    for _, rho in traj:
        assert abs(np.trace(rho.data) - 1.0) < 1e-8
        assert np.linalg.eigvalsh(rho.data).min() > -1e-6


def test_evolve_stops_early_at_steady_state(benchmark_params):
    rho_ss = analytic_steady_state(benchmark_params).matrix()
    traj = evolve(rho_ss, benchmark_params, 1e4)
    assert traj.stopped_early
    assert traj.t_final < 1e4


def test_evolve_rejects_bad_inputs(benchmark_params):
    with pytest.raises(IntegrationError):
        evolve(DensityMatrix3.projector("g"), benchmark_params, 0.0)
    with pytest.raises(IntegrationError, match="not physical"):
        evolve(np.diag([2.0, -1.0, 0.0]), benchmark_params, 1.0)


def test_lab_frame_state_rotates_only_the_coherence(benchmark_params):
    rho = analytic_steady_state(benchmark_params).density()
    t = 0.37
    lab = lab_frame_state(rho, benchmark_params, t)
    assert lab.populations == pytest.approx(rho.populations)
    assert lab.coherence_ul == pytest.approx(rho.coherence_ul * np.exp(-1j * benchmark_params.omega_d * t))
    assert np.allclose(np.linalg.eigvalsh(lab.data), np.linalg.eigvalsh(rho.data))


def test_trajectory_iterates_as_density_matrices():
    states = np.array([np.eye(3) / 3] * 2, dtype=complex)
    traj = Trajectory(times=np.array([0.0, 1.0]), states=states)
    pairs = list(traj)
    assert len(traj) == 2
    assert pairs[1][0] == 1.0
    assert isinstance(pairs[1][1], DensityMatrix3)


def test_master_rhs_is_linear(benchmark_params, rng):
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a, b = 0.7 - 0.2j, -1.3 + 0.4j
    combined = master_rhs(a * x + b * y, benchmark_params)
    assert np.allclose(combined, a * master_rhs(x, benchmark_params) + b * master_rhs(y, benchmark_params),
                       atol=1e-13)


def test_rhs_preserves_hermiticity_off_the_state_space(benchmark_params, rng):
    z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = z + z.conj().T
    assert np.linalg.eigvalsh(h).min() < 0
    out = master_rhs(h, benchmark_params)
    assert np.allclose(out, out.conj().T, atol=1e-13)


def test_liouvillian_has_a_trace_row_and_a_single_kernel_direction(benchmark_params):
    lv = build_liouvillian(benchmark_params).matrix
    trace_row = vectorize(np.eye(3)).conj()
    assert np.max(np.abs(trace_row @ lv)) < 1e-13
    s = np.linalg.svd(lv, compute_uv=False)
    assert np.linalg.matrix_rank(lv, tol=1e-10 * s[0]) == 8
    assert s[-1] < 1e-12 * s[0]
    assert s[-2] > 1e-6 * s[0]


def test_zero_temperature_undriven_kernel_is_the_ground_state(benchmark_params):
    p = benchmark_params.with_changes(epsilon=0.0, n_u=0.0, n_l=0.0)
    lv = build_liouvillian(p)
    assert np.max(np.abs(lv.apply(sigma("g", "g")))) < 1e-15
    assert np.allclose(nullspace_steady_state(p).matrix(), sigma("g", "g"), atol=1e-12)


def test_zero_temperature_upper_level_decays_exponentially(benchmark_params):
    p = benchmark_params.with_changes(epsilon=0.0, n_u=0.0, n_l=0.0, gamma_u=0.8)
    traj = evolve(DensityMatrix3.projector("u"), p, 5.0, stop_at_steady_state=False)
    for t, rho in traj:
        assert rho.entry("u", "u").real == pytest.approx(np.exp(-0.8 * t), abs=1e-8)


def test_trace_is_conserved_along_a_trajectory(benchmark_params):
    traj = evolve(DensityMatrix3.projector("g"), benchmark_params, 20.0, stop_at_steady_state=False)
    traces = np.trace(traj.states, axis1=1, axis2=2)
    assert np.max(np.abs(traces - 1.0)) < 1e-9
