from __future__ import annotations

import numpy as np
import pytest

from maserthermo.dynamics import steady_state
from maserthermo.dynamics.lindblad import Liouvillian
from maserthermo.dynamics.steady_state import (
    SteadyState,
    af_coefficients,
    analytic_steady_state,
    classical_rate_matrix,
    classical_steady_populations,
    coherence_factor_C,
    coherence_from_populations,
    nullspace_steady_state,
    population_difference,
    rate_from_coherence,
    rate_saturation_profile,
    rate_u_to_l,
    steady_state_checks,
)
from maserthermo.errors import SteadyStateError


def test_benchmark_closed_forms(benchmark_params):
    assert coherence_factor_C(benchmark_params) == pytest.approx(0.1923077, rel=1e-6)
    a, f = af_coefficients(benchmark_params)
    assert a == pytest.approx(0.3125)
    assert f == pytest.approx(24.5625)
    assert rate_u_to_l(benchmark_params) == pytest.approx(0.0127226, rel=1e-5)
    assert population_difference(benchmark_params) == pytest.approx(0.066158, rel=1e-5)


def test_analytic_state_is_consistent(benchmark_params):
    ss = analytic_steady_state(benchmark_params)
    assert ss.rho_gg + ss.rho_uu + ss.rho_ll == pytest.approx(1.0, abs=1e-14)
    assert ss.population_difference == pytest.approx(population_difference(benchmark_params), rel=1e-12)
    assert rate_from_coherence(benchmark_params, ss.rho_ul) == pytest.approx(rate_u_to_l(benchmark_params), rel=1e-12)
    assert rate_u_to_l(benchmark_params) == pytest.approx(
        coherence_factor_C(benchmark_params) * ss.population_difference, rel=1e-12
    )
    assert all(c.passed for c in steady_state_checks(ss, benchmark_params))


def test_nullspace_matches_analytic(benchmark_params, violation_params):
    for params in (benchmark_params, violation_params):
        analytic = analytic_steady_state(params)
        numeric = nullspace_steady_state(params)
        assert numeric.source == "nullspace"
        assert analytic.deviation(numeric) < 1e-8
        assert numeric.hermitization_residual < 1e-10


def test_equal_occupations_give_no_rate(benchmark_params):
    p = benchmark_params.with_changes(n_l=2.0)
    ss = analytic_steady_state(p)
    assert rate_u_to_l(p) == 0.0
    assert ss.population_difference == pytest.approx(0.0, abs=1e-15)
    assert ss.rho_ul == 0


def test_zero_coupling_reduces_to_classical_rates(benchmark_params):
    p = benchmark_params.with_changes(epsilon=0.0)
    ss = analytic_steady_state(p)
    pops = classical_steady_populations(p)
    assert np.allclose([ss.rho_gg, ss.rho_uu, ss.rho_ll], pops, atol=1e-14)
    assert np.allclose(classical_rate_matrix(p) @ pops, 0.0, atol=1e-14)
    assert rate_u_to_l(p) == 0.0


def test_zero_temperature_baths_leave_ground_state(benchmark_params):
    ss = analytic_steady_state(benchmark_params.with_changes(n_u=0.0, n_l=0.0))
    assert ss.rho_gg == pytest.approx(1.0)


def test_small_coupling_scaling(benchmark_params):
    ratios = [rate_u_to_l(benchmark_params.with_changes(epsilon=e)) / e**2 for e in (1e-3, 1e-4)]
    assert abs(ratios[0] / ratios[1] - 1.0) < 1e-3


def test_rate_saturates_with_coupling(benchmark_params):
    eps = np.sqrt(np.linspace(0.01, 25.0, 60))
    eps2, rates = rate_saturation_profile(benchmark_params, eps)
    slopes = np.diff(rates) / np.diff(eps2)
    assert np.all(slopes > 0)
    assert np.all(np.diff(slopes) < 0)


def test_coherence_from_populations_sign(benchmark_params):
    rho_ul = coherence_from_populations(benchmark_params, 0.1)
    # Im rho_ul carries the sign of the population difference
    assert rho_ul.imag > 0
    assert rate_from_coherence(benchmark_params, rho_ul) == pytest.approx(
        coherence_factor_C(benchmark_params) * 0.1, rel=1e-12
    )


def test_steady_state_matrix_and_density(benchmark_params):
    ss = analytic_steady_state(benchmark_params)
    m = ss.matrix()
    assert m[2, 1] == np.conj(m[1, 2])
    again = SteadyState.from_matrix(m, source="copy")
    assert again.deviation(ss) == 0.0
    assert ss.density().coherence_ul == ss.rho_ul


@pytest.mark.parametrize("delta", [0.3, 1.0, 2.5])
def test_rate_is_even_in_detuning(benchmark_params, delta):
    plus = rate_u_to_l(benchmark_params.with_detuning(delta))
    minus = rate_u_to_l(benchmark_params.with_detuning(-delta))
    assert plus == pytest.approx(minus, rel=1e-14)


def test_doubling_detuning_moves_only_the_lorentzian_term(benchmark_params):
    a1, f1 = af_coefficients(benchmark_params)
    a2, f2 = af_coefficients(benchmark_params.with_detuning(2.0 * benchmark_params.delta))
    p = benchmark_params
    prefactor = p.gamma_u * p.gamma_l / 4.0 * (3 * p.n_u * p.n_l + 2 * p.n_u + 2 * p.n_l + 1)
    assert a2 == a1
    assert f2 - f1 == pytest.approx(prefactor * 3.0 * p.delta**2, rel=1e-12)


def test_degenerate_kernel_reports_singular_values(benchmark_params, monkeypatch):
    def split_liouvillian(params):
        return Liouvillian(matrix=np.diag([0.0, 0.0] + [1.0] * 7).astype(complex))

    monkeypatch.setattr(steady_state, "build_liouvillian", split_liouvillian)
    with pytest.raises(SteadyStateError, match="dimension 2") as info:
        nullspace_steady_state(benchmark_params)
    assert info.value.singular_values == (0.0, 0.0)
