"""POVM, classical Fisher, and covariant-measurement tests."""

import numpy as np
import pytest

from conftest import real_nonneg_x_state

from qfi.hilbert import (
    DensityOperator,
    HermitianOperator,
    PureState,
    commutator_path_tangent,
    eig_hermitian,
    random_density,
    random_hermitian,
    random_pure,
    variance,
)
from qfi.metric import StateFamily, qfi_unitary
from qfi.povm import (
    CovariantPOVM,
    DiscretePOVM,
    SpectrumModel,
    build_covariant,
    classical_fisher,
    displacement_operator,
    optimality_test,
    outcome_distribution,
    sld_projective_povm,
    validate_povm,
    variance_split,
)


def haar_basis(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_povm(dim, n_elements, rng):
    """Random informationally rich POVM via the S^{-1/2} normalization trick."""
    blocks = []
    for _ in range(n_elements):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        blocks.append(g @ g.conj().T)
    total = np.sum(blocks, axis=0)
    w, v = np.linalg.eigh(total)
    root_inv = (v / np.sqrt(w)) @ v.conj().T
    elements = np.array([root_inv @ b @ root_inv for b in blocks])
    elements = (elements + np.conj(np.transpose(elements, (0, 2, 1)))) / 2
    return DiscretePOVM(np.arange(n_elements, dtype=float), np.ones(n_elements), elements=elements)


def fock_spectrum(dim):
    return SpectrumModel(
        np.arange(dim, dtype=float), np.eye(dim, dtype=complex), period=2 * np.pi
    )


def line_spectrum(k):
    n = np.arange(-k, k + 1, dtype=float)
    return SpectrumModel(n, np.eye(len(n), dtype=complex), period=2 * np.pi)


def gaussian_line_state(k, sigma_n):
    n = np.arange(-k, k + 1, dtype=float)
    amp = np.exp(-(n**2) / (4 * sigma_n**2))
    return PureState(amp / np.linalg.norm(amp))


def symmetric_positive_state(dim, rng):
    """Random positive populations mirror-symmetric about the band center.

    Such states have x-wavefunction = carrier * (real envelope): the
    measurement-optimal class for the canonical covariant POVM.
    """
    half = rng.random((dim + 1) // 2) + 0.1
    amp = np.concatenate([half, half[: dim // 2][::-1]])
    return PureState(amp / np.linalg.norm(amp))


class TestValidatePovm:
    def test_projective_passes(self, rng):
        povm = DiscretePOVM.projective(haar_basis(5, rng))
        report = validate_povm(povm)
        assert report.passed
        assert report.completeness_residual <= 1e-12

    def test_halved_elements_fail(self, rng):
        basis = haar_basis(4, rng)
        povm = DiscretePOVM(
            np.arange(4.0), np.full(4, 0.5), vectors=basis.T.copy()
        )
        report = validate_povm(povm)
        assert not report.complete
        assert report.completeness_residual == pytest.approx(0.5, abs=1e-12)

    def test_canonical_phase_povm(self):
        povm = build_covariant(fock_spectrum(8), grid_size=64)
        assert validate_povm(povm.to_discrete()).passed

    def test_random_povm_valid(self, rng):
        report = validate_povm(random_povm(3, 7, rng))
        assert report.passed


class TestOutcomeDistribution:
    def test_projective_on_own_eigenstate(self, rng):
        basis = haar_basis(4, rng)
        povm = DiscretePOVM.projective(basis)
        p = outcome_distribution(povm, PureState(basis[:, 2]))
        np.testing.assert_allclose(p, [0, 0, 1, 0], atol=1e-12)

    def test_maximally_mixed_uniform(self, rng):
        d = 5
        povm = DiscretePOVM.projective(haar_basis(d, rng))
        p = outcome_distribution(povm, DensityOperator(np.eye(d) / d))
        np.testing.assert_allclose(p, np.full(d, 1 / d), atol=1e-12)

    def test_number_state_gives_uniform_phase(self):
        povm = build_covariant(fock_spectrum(8), grid_size=64).to_discrete()
        amp = np.zeros(8)
        amp[3] = 1.0
        p = outcome_distribution(povm, PureState(amp))
        np.testing.assert_allclose(p, np.full(64, 1 / 64), atol=1e-12)

    def test_sums_to_one(self, rng):
        povm = random_povm(4, 9, rng)
        p = outcome_distribution(povm, random_density(4, rng))
        assert p.sum() == pytest.approx(1.0, abs=1e-10)


class TestClassicalFisher:
    def test_number_state_blind(self):
        spec = fock_spectrum(8)
        povm = build_covariant(spec, grid_size=64)
        amp = np.zeros(8)
        amp[5] = 1.0
        family = StateFamily(PureState(amp), HermitianOperator(np.diag(np.arange(8.0))))
        assert classical_fisher(povm, family) == pytest.approx(0.0, abs=1e-12)

    def test_real_nonnegative_saturates(self, rng):
        spec = fock_spectrum(12)
        povm = build_covariant(spec, grid_size=64)
        h = HermitianOperator(np.diag(np.arange(12.0)))
        family = StateFamily(symmetric_positive_state(12, rng), h)
        f = classical_fisher(povm, family)
        assert f == pytest.approx(4 * variance(h, family.fiducial), rel=1e-6)

    def test_gaussian_law_matches_quadrature_oracle(self):
        spec = line_spectrum(16)
        fiducial = gaussian_line_state(16, 3.0)
        h = HermitianOperator(np.diag(spec.eigenvalues))
        family = StateFamily(fiducial, h)
        povm = build_covariant(spec, grid_size=256)
        f = classical_fisher(povm, family)

        # oracle: fine-grid quadrature of (p')^2/p with spectral derivatives
        fine = build_covariant(spec, grid_size=4096)
        psi = fine.wavefunction(fiducial)
        dpsi = fine.wavefunction_derivative(fiducial)
        p = np.abs(psi) ** 2
        dp = 2 * (psi.conj() * dpsi).real
        keep = p > 1e-16
        oracle = fine.cell * np.sum(dp[keep] ** 2 / p[keep])
        assert f == pytest.approx(oracle, rel=1e-6)

        # and the Gaussian relation F = 1/sigma^2 up to discreteness corrections
        pd = outcome_distribution(povm.to_discrete(), fiducial)
        mean = np.sum(pd * povm.grid)
        sigma2 = np.sum(pd * (povm.grid - mean) ** 2)
        assert f * sigma2 == pytest.approx(1.0, abs=1e-5)

    def test_all_probabilities_floored_error(self):
        # a POVM that never fires cannot be complete; force the floor error
        spec = fock_spectrum(4)
        povm = build_covariant(spec, grid_size=16)
        family = StateFamily(
            PureState([1.0, 0, 0, 0]), HermitianOperator(np.diag(np.arange(4.0)))
        )
        with pytest.raises(ValueError, match="floor"):
            classical_fisher(povm, family, p_floor=1.0)


class TestBuildCovariant:
    def test_two_level_completeness(self):
        spec = SpectrumModel(
            np.array([0.0, 1.0]), np.eye(2, dtype=complex), period=2 * np.pi
        )
        povm = build_covariant(spec, grid_size=16)
        assert povm.to_discrete().completeness_residual() <= 1e-10

    def test_degenerate_spectrum_rejected(self):
        spec = SpectrumModel(
            np.array([1.0, 1.0 + 1e-12]), np.eye(2, dtype=complex), period=None
        )
        with pytest.raises(ValueError, match="no degeneracies"):
            build_covariant(spec, grid_size=16, window=(-1.0, 1.0))

    def test_undersampled_grid_rejected(self):
        with pytest.raises(ValueError, match="resolution"):
            build_covariant(fock_spectrum(8), grid_size=16)

    def test_gauge_equivalence(self, rng):
        spec = fock_spectrum(6)
        f_values = rng.uniform(-np.pi, np.pi, size=6)
        canonical = build_covariant(spec, grid_size=32)
        gauged = build_covariant(spec, gauge=f_values, grid_size=32)
        psi = random_pure(6, rng)
        # gauged outcome states are e^{if(h)}|x>, so re-phasing the probe by
        # e^{if(h)} leaves the statistics of the canonical measurement
        rotated = PureState(np.exp(1j * f_values) * psi.amplitudes)
        p_canonical = outcome_distribution(canonical.to_discrete(), psi)
        p_gauged = outcome_distribution(gauged.to_discrete(), rotated)
        np.testing.assert_allclose(p_gauged, p_canonical, atol=1e-10)

    def test_inner_product_geometric_sum(self):
        d = 5
        povm = build_covariant(fock_spectrum(d), grid_size=32)
        states = povm.states
        x = povm.grid
        for m, mp in [(0, 7), (3, 20), (11, 12)]:
            want = np.sum(np.exp(1j * (x[m] - x[mp]) * np.arange(d)))
            got = np.vdot(states[m], states[mp])
            assert got == pytest.approx(want, abs=1e-10)

    def test_displacement_shift_property(self, rng):
        # p(x | X) = p(x - X): grid-multiple displacements shift circularly
        d, m = 6, 32
        spec = fock_spectrum(d)
        povm = build_covariant(spec, grid_size=m)
        psi = random_pure(d, rng)
        family = StateFamily(psi, HermitianOperator(np.diag(np.arange(float(d)))))
        p0 = outcome_distribution(povm.to_discrete(), psi)
        k = 5
        shift = k * povm.cell  # p(x|X) = p(x - X): moves k cells up the grid
        p_shifted = outcome_distribution(povm.to_discrete(), family.state_at(shift))
        np.testing.assert_allclose(p_shifted, np.roll(p0, k), atol=1e-9)

    def test_window_requires_bounds(self):
        spec = SpectrumModel(np.array([0.0, 1.3]), np.eye(2, dtype=complex))
        with pytest.raises(ValueError, match="window"):
            build_covariant(spec, grid_size=16)


class TestDisplacementOperator:
    def test_zero_shift_identity(self):
        povm = build_covariant(fock_spectrum(5), grid_size=32)
        np.testing.assert_allclose(
            displacement_operator(povm, 0.0), np.eye(5), atol=1e-9
        )

    def test_lowering_on_fock(self):
        d = 5
        povm = build_covariant(fock_spectrum(d), grid_size=32)
        dop = displacement_operator(povm, -1.0)
        want = np.diag(np.ones(d - 1), k=-1).T  # sum_n |n-1><n|
        np.testing.assert_allclose(dop, want, atol=1e-9)
        # annihilates |0> and is not unitary
        np.testing.assert_allclose(dop @ np.eye(d)[:, 0], 0, atol=1e-9)
        assert np.max(np.abs(dop.conj().T @ dop - np.eye(d))) > 0.5

    def test_interior_unitarity_on_line(self):
        k = 4
        povm = build_covariant(line_spectrum(k), grid_size=64)
        dop = displacement_operator(povm, 1.0)
        d = 2 * k + 1
        # D(1)^dag D(1) projects onto everything but the top level
        proj = np.eye(d)
        proj[-1, -1] = 0.0
        np.testing.assert_allclose(dop.conj().T @ dop, proj, atol=1e-9)

    def test_invalid_shift_rejected(self):
        povm = build_covariant(fock_spectrum(4), grid_size=16)
        with pytest.raises(ValueError, match="difference"):
            displacement_operator(povm, 0.5)


class TestOptimalityTest:
    def test_real_nonnegative_passes(self, rng):
        d = 9
        povm = build_covariant(fock_spectrum(d), grid_size=64)
        fiducial = real_nonneg_x_state(d, rng)
        report = optimality_test(povm, fiducial, tol=1e-9)
        assert report.passed
        assert report.phase_residual <= 1e-9
        assert report.symmetry_residual <= 1e-12

    def test_generator_eigenstate_passes(self):
        d = 6
        povm = build_covariant(fock_spectrum(d), grid_size=32)
        amp = np.zeros(d)
        amp[4] = 1.0
        report = optimality_test(povm, PureState(amp), tol=1e-9)
        assert report.passed
        assert report.symmetry_residual <= 1e-12

    def test_chirp_residual_scales_linearly(self):
        d = 16
        povm = build_covariant(fock_spectrum(d), grid_size=128)
        n = np.arange(d, dtype=float)
        base = np.exp(-((n - 7.5) ** 2) / 8.0)
        base /= np.linalg.norm(base)

        def residual(beta):
            fiducial = PureState(base * np.exp(1j * beta * (n - 7.5) ** 2))
            return optimality_test(povm, fiducial, tol=1e-9).phase_residual

        r1, r2 = residual(0.01), residual(0.02)
        assert not np.isclose(r1, 0.0)
        assert r2 / r1 == pytest.approx(2.0, rel=0.2)

    def test_pass_implies_fisher_saturation(self, rng):
        # cross-module: optimal measurement reaches the quantum bound
        d = 10
        spec = fock_spectrum(d)
        povm = build_covariant(spec, grid_size=64)
        h = HermitianOperator(np.diag(np.arange(float(d))))
        for _ in range(5):
            fiducial = real_nonneg_x_state(d, rng)
            assert optimality_test(povm, fiducial, tol=1e-8).passed
            family = StateFamily(fiducial, h)
            f = classical_fisher(povm, family)
            assert f == pytest.approx(qfi_unitary(family), rel=1e-5)


class TestVarianceSplit:
    def test_real_amplitude_phase_var_vanishes(self, rng):
        d = 12
        povm = build_covariant(fock_spectrum(d), grid_size=64)
        fiducial = symmetric_positive_state(d, rng)
        split = variance_split(povm, fiducial)
        assert split.phase_var <= 1e-9
        h = HermitianOperator(np.diag(np.arange(float(d))))
        assert split.fisher_quarter == pytest.approx(variance(h, fiducial), rel=1e-9)

    def test_eigenstate_both_zero(self):
        d = 6
        povm = build_covariant(fock_spectrum(d), grid_size=32)
        amp = np.zeros(d)
        amp[2] = 1.0
        split = variance_split(povm, PureState(amp))
        assert split.fisher_quarter == pytest.approx(0.0, abs=1e-12)
        assert split.phase_var == pytest.approx(0.0, abs=1e-12)

    def test_chirped_gaussian_matches_fine_quadrature(self):
        d = 16
        spec = fock_spectrum(d)
        povm = build_covariant(spec, grid_size=128)
        n = np.arange(d, dtype=float)
        amp = np.exp(-((n - 7.5) ** 2) / 10.0) * np.exp(1j * 0.04 * (n - 7.5) ** 2)
        amp /= np.linalg.norm(amp)
        fiducial = PureState(amp)
        split = variance_split(povm, fiducial)

        fine = build_covariant(spec, grid_size=2048)
        psi = fine.wavefunction(fiducial)
        dpsi = fine.wavefunction_derivative(fiducial)
        p = np.abs(psi) ** 2
        keep = p > 1e-14
        dp = 2 * (psi.conj() * dpsi).real
        mean_h = fine.generator_mean(fiducial)
        theta_prime = (dpsi[keep] / psi[keep]).imag
        oracle_fisher = 0.25 * fine.cell * np.sum(dp[keep] ** 2 / p[keep])
        oracle_phase = fine.cell * np.sum(p[keep] * (theta_prime - mean_h) ** 2)
        assert split.fisher_quarter == pytest.approx(oracle_fisher, rel=1e-6)
        assert split.phase_var == pytest.approx(oracle_phase, rel=1e-6)
        # the split adds up to the generator variance
        h = HermitianOperator(np.diag(n))
        total = split.fisher_quarter + split.phase_var
        assert total == pytest.approx(variance(h, fiducial), rel=1e-6)


class TestSldProjectivePovm:
    def test_pure_qubit_saturation(self):
        psi = PureState([1 / np.sqrt(2), 1 / np.sqrt(2)])
        h = HermitianOperator(np.diag([0.0, 1.0]) - 0.5 * np.eye(2))  # sigma_z / 2
        family = StateFamily(psi, h)
        rho = psi.density()
        povm = sld_projective_povm(rho, family.tangent())
        f = classical_fisher(povm, family)
        assert f == pytest.approx(1.0, rel=1e-6)
        assert f == pytest.approx(qfi_unitary(family), rel=1e-6)

    def test_maximally_mixed_zero(self, rng):
        rho = DensityOperator(np.eye(2) / 2)
        h = random_hermitian(2, rng)
        family = StateFamily(rho, h)
        povm = sld_projective_povm(rho, family.tangent())
        assert classical_fisher(povm, family) == pytest.approx(0.0, abs=1e-12)

    def test_mixed_qubit_matches_qfi(self):
        rho = DensityOperator(np.diag([0.8, 0.2]))
        h = HermitianOperator(np.array([[0, 0.5], [0.5, 0]]))
        family = StateFamily(rho, h)
        povm = sld_projective_povm(rho, family.tangent())
        f = classical_fisher(povm, family)
        assert f == pytest.approx(qfi_unitary(family), rel=1e-6)


class TestQuantumBoundProperty:
    def test_fisher_never_exceeds_qfi(self, rng):
        # 100 random (POVM, family) pairs across kinds and dimensions
        for i in range(100):
            dim = int(rng.integers(2, 5))
            if i % 3 == 0:
                povm = DiscretePOVM.projective(haar_basis(dim, rng))
            else:
                povm = random_povm(dim, int(rng.integers(dim, 2 * dim + 1)), rng)
            if i % 2 == 0:
                family = StateFamily(random_pure(dim, rng), random_hermitian(dim, rng))
            else:
                family = StateFamily(
                    random_density(dim, rng, min_eigenvalue=1e-3),
                    random_hermitian(dim, rng),
                )
            f = classical_fisher(povm, family)
            q = qfi_unitary(family)
            assert f <= q + 1e-6 * max(1.0, q)
