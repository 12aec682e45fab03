"""Squeezed-vacuum displacement scenario: closed forms and Monte-Carlo."""

import numpy as np
import pytest

from qfi.estimate import bound_audit
from qfi.scenarios import (
    SqueezedParams,
    gamma,
    squeezed_covariance,
    squeezed_mc_scenario,
    squeezed_nsr,
    squeezed_optimal,
)


def grid_params(n_r=20, n_phi=20, r_max=2.0):
    for r in np.linspace(0.0, r_max, n_r):
        for phi in np.linspace(0.0, np.pi, n_phi):
            yield SqueezedParams(float(r), float(phi))


class TestGamma:
    def test_vacuum(self):
        assert gamma(SqueezedParams(0.0, 0.7)).value == pytest.approx(1.0)

    def test_aligned_angle(self):
        assert gamma(SqueezedParams(1.2, 0.0)).value == pytest.approx(np.exp(2.4))

    def test_pi_quarter(self):
        # cos(2 phi) = 0 collapses the middle form to (1 + i sinh 2r)/cosh 2r
        got = gamma(SqueezedParams(1.0, np.pi / 4)).value
        assert got == pytest.approx((1.0 + 1j * np.sinh(2.0)) / np.cosh(2.0))

    def test_forms_agree_on_grid(self):
        for params in grid_params():
            g = gamma(params)
            assert g.form_spread <= 1e-12 * max(1.0, abs(g.value))
            assert g.value.real > 0

    def test_negative_r_rejected(self):
        with pytest.raises(ValueError, match="r must be"):
            SqueezedParams(-0.1, 0.0)


class TestCovariance:
    def test_vacuum_minimum_uncertainty(self):
        var_x, var_p, cov = squeezed_covariance(SqueezedParams(0.0, 0.3))
        assert var_x == pytest.approx(0.5)
        assert var_p == pytest.approx(0.5)
        assert cov == pytest.approx(0.0)

    def test_principal_axes(self):
        r = 0.9
        var_x, var_p, cov = squeezed_covariance(SqueezedParams(r, 0.0))
        assert var_x == pytest.approx(np.exp(-2 * r) / 2)
        assert var_p == pytest.approx(np.exp(2 * r) / 2)
        assert cov == pytest.approx(0.0)

    def test_dual_route_consistency(self):
        # gamma route and hyperbolic route agree (checked inside, too)
        var_x, var_p, cov = squeezed_covariance(SqueezedParams(0.8, 0.6))
        g = gamma(SqueezedParams(0.8, 0.6)).value
        assert var_x == pytest.approx(1 / (2 * g.real), abs=1e-12)
        assert var_p == pytest.approx(1 / (2 * (1 / g).real), abs=1e-12)

    def test_heisenberg_determinant_on_grid(self):
        for params in grid_params():
            var_x, var_p, cov = squeezed_covariance(params)
            assert var_x * var_p - cov**2 == pytest.approx(0.25, abs=1e-12)


class TestOptimal:
    def test_aligned_angles_trivial(self):
        for phi in (0.0, np.pi / 2):
            opt = squeezed_optimal(SqueezedParams(1.3, phi))
            assert opt.tan_theta == pytest.approx(0.0, abs=1e-12)

    def test_pi_quarter_tanh(self):
        r = 0.7
        opt = squeezed_optimal(SqueezedParams(r, np.pi / 4))
        assert opt.tan_theta == pytest.approx(np.tanh(2 * r))

    def test_variance_product_exact(self):
        for params in grid_params(10, 10):
            opt = squeezed_optimal(params)
            _, var_p, _ = squeezed_covariance(params)
            assert opt.var_xhat * var_p == pytest.approx(0.25, abs=1e-13)


class TestNsr:
    def test_zero_angle_is_var_x(self):
        params = SqueezedParams(1.1, 0.4)
        var_x, _, _ = squeezed_covariance(params)
        assert squeezed_nsr(params, 0.0) == pytest.approx(var_x)

    def test_optimum_value_and_location(self):
        params = SqueezedParams(1.0, 0.3)
        opt = squeezed_optimal(params)
        theta_star = np.arctan(opt.tan_theta)
        assert squeezed_nsr(params, theta_star) == pytest.approx(opt.var_xhat, rel=1e-12)

        # golden-section minimization oracle
        import scipy.optimize as sopt

        res = sopt.minimize_scalar(
            lambda t: squeezed_nsr(params, t),
            bounds=(-np.pi / 2 + 0.01, np.pi / 2 - 0.01),
            method="bounded",
            options={"xatol": 1e-10},
        )
        assert np.tan(res.x) == pytest.approx(opt.tan_theta, abs=1e-6)

    def test_convex_in_tan_theta(self):
        params = SqueezedParams(0.9, 0.5)
        ts = np.linspace(-1.2, 1.2, 41)
        vals = np.array([squeezed_nsr(params, np.arctan(t)) for t in ts])
        second = vals[:-2] - 2 * vals[1:-1] + vals[2:]
        assert np.all(second > 0)
        t_min = ts[np.argmin(vals)]
        assert t_min == pytest.approx(squeezed_optimal(params).tan_theta, abs=0.07)

    def test_vertical_angle_rejected(self):
        with pytest.raises(ValueError, match="cos"):
            squeezed_nsr(SqueezedParams(0.5, 0.2), np.pi / 2)


class TestMonteCarlo:
    def test_vacuum_single_shot(self):
        report = squeezed_mc_scenario(SqueezedParams(0.0, 0.0), n=1, trials=100_000, seed=4)
        band = 3 * 0.5 * np.sqrt(2 / 100_000)
        assert report.n * report.mse == pytest.approx(0.5, abs=band)

    def test_aligned_squeezing(self):
        report = squeezed_mc_scenario(SqueezedParams(1.0, 0.0), n=10, trials=50_000, seed=8)
        want = np.exp(-2.0) / 2
        band = 3 * want * np.sqrt(2 / 50_000)
        assert report.n * report.mse == pytest.approx(want, abs=band)

    def test_bound_product_saturates(self):
        for seed, params in enumerate([SqueezedParams(0.5, 0.9), SqueezedParams(1.5, 0.2)]):
            report = squeezed_mc_scenario(params, x=0.1, n=10, trials=50_000, seed=seed)
            product = 4 * report.n * report.mse * report.generator_variance
            assert product == pytest.approx(1.0, abs=3 * np.sqrt(2 / 50_000))
            verdict = bound_audit(report)
            assert verdict.passed

    def test_report_serialization_round_trip(self):
        import json

        report = squeezed_mc_scenario(SqueezedParams(1.0, 0.3), n=10, trials=1000, seed=7)
        payload = json.loads(report.to_json())
        assert payload["schema"] == 1
        assert payload["scenario"] == "squeezed"
        assert payload["ratio_quantum"] == pytest.approx(report.bound_ratio_quantum)
        csv_text = report.to_csv()
        header, row = csv_text.strip().splitlines()
        assert header.startswith("scenario,seed,N,trials,mse,slope,fisher,qfi")
        assert row.split(",")[0] == "squeezed"
