import math
import os

import numpy as np
import pytest
from mpmath import mp, mpf

import udwchain as u
from udwchain.chain import (
    ModelParams,
    chain_coefficients,
    generate_thermal_coefficients,
    hankel_matrix,
    read_coefficient_table,
    thermal_chain_coefficients,
    thermal_moments,
    thermal_poly_coeffs,
    vacuum_coefficients,
    vacuum_poly_coeffs,
    write_coefficient_table,
)
from udwchain.errors import PrecisionExhausted
from udwchain.highprec import PrecisionConfig, integrate_weight_moment_numeric


class TestVacuumCoefficients:
    def test_small_chain_closed_forms(self):
        c = vacuum_coefficients(1.0, 2)
        assert c.gamma[0] == pytest.approx(-math.sqrt(2) / 2, rel=1e-15)
        assert c.nu[0] == pytest.approx(1.0, rel=1e-15)
        assert c.nu[1] == pytest.approx(2.0, rel=1e-15)
        assert c.kappa == pytest.approx(1 / math.sqrt(8 * math.pi), rel=1e-15)

    def test_length_scaling(self):
        a = vacuum_coefficients(1.0, 30)
        b = vacuum_coefficients(2.0, 30)
        assert np.allclose(b.gamma, a.gamma / 2, rtol=1e-15)
        assert np.allclose(b.nu, a.nu / 2, rtol=1e-15)
        assert b.kappa == pytest.approx(a.kappa / 2, rel=1e-15)
        assert b.gamma_trunc == pytest.approx(a.gamma_trunc / 2, rel=1e-15)

    def test_kappa_value(self):
        # 1/sqrt(8 pi)
        assert vacuum_coefficients(1.0, 5).kappa == pytest.approx(
            0.19947114020071635, abs=1e-16)


class TestVacuumPolynomials:
    def test_p0_constant(self):
        p0 = vacuum_poly_coeffs(0, 1.0)
        with mp.workdps(50):
            assert abs(p0[0] - mp.sqrt(8 * mp.pi)) < mpf("1e-45")

    def test_p1_coeffs(self):
        # p_1(k) = (L sqrt(8 pi)/sqrt(2)) (2 - 2 L k)
        p1 = vacuum_poly_coeffs(1, 1.0)
        with mp.workdps(50):
            front = mp.sqrt(8 * mp.pi) / mp.sqrt(2)
            assert abs(p1[0] - 2 * front) < mpf("1e-40")
            assert abs(p1[1] + 2 * front) < mpf("1e-40")

    def test_orthonormality_by_quadrature(self):
        # integral 2 |f_k|^2 p_i p_j dk = delta_ij with 2|f_k|^2 = k e^{-2Lk}/(2 pi)
        with mp.workdps(40):
            polys = [vacuum_poly_coeffs(i, 1.0) for i in range(3)]

            def pval(coeffs, k):
                return mp.fsum(c * k ** n for n, c in enumerate(coeffs))

            for i in range(3):
                for j in range(3):
                    val = mp.quad(lambda k: k * mp.e ** (-2 * k) / (2 * mp.pi)
                                  * pval(polys[i], k) * pval(polys[j], k),
                                  [0, 40])
                    assert abs(val - (1 if i == j else 0)) < mpf("1e-25")


class TestThermalMoments:
    def test_vacuum_surrogate(self):
        moms = thermal_moments(1.0, 1e8, 30, 60)
        with mp.workdps(60):
            for n, m_n in enumerate(moms.moments):
                target = mp.factorial(n + 1) / (mp.pi * 2 ** (n + 3))
                assert abs(m_n - target) / target < mpf("1e-6")

    def test_odd_moments_beta_independent(self):
        # the even/odd bracket structure drops the polygamma term for odd n
        a = thermal_moments(1.0, 2 * math.pi, 10, 50).moments
        b = thermal_moments(1.0, 5.0, 10, 50).moments
        with mp.workdps(50):
            for n in (1, 3, 5, 7, 9):
                assert abs(a[n] - b[n]) / abs(a[n]) < mpf("1e-45")
            for n in (0, 2):
                assert abs(a[n] - b[n]) / abs(a[n]) > mpf("1e-3")

    def test_against_quadrature_oracle(self):
        moms = thermal_moments(1.0, 2 * math.pi, 5, 60)
        oracle = integrate_weight_moment_numeric(3, 1.0, 2 * math.pi,
                                                 PrecisionConfig(50))
        with mp.workdps(60):
            assert abs(moms.moments[3] - oracle) / abs(oracle) < mpf("1e-20")


class TestThermalPolynomials:
    def test_p00_is_inverse_sqrt_m0(self):
        moms = thermal_moments(1.0, 2 * math.pi, 21, 80)
        poly = thermal_poly_coeffs(moms, 10, 80)
        with mp.workdps(80):
            assert abs(poly[0][0] - 1 / mp.sqrt(moms.moments[0])) < mpf("1e-70")

    def test_vacuum_limit_rows_match_laguerre(self):
        # q_n = (-1)^n p_n in the Cholesky gauge (positive leading coefficient)
        n_modes = 52
        moms = thermal_moments(1.0, 1e8, 2 * n_modes + 1, 300)
        poly = thermal_poly_coeffs(moms, n_modes, 300)
        with mp.workdps(310):
            for n in (0, 1, 5, 25, 50):
                vac = vacuum_poly_coeffs(n, 1.0, PrecisionConfig(300))
                for k in range(n + 1):
                    ref = (-1) ** n * vac[k]
                    assert abs(poly[n][k] - ref) / abs(ref) < mpf("1e-8")

    def test_hankel_needs_enough_moments(self):
        moms = thermal_moments(1.0, 2 * math.pi, 11, 60)
        with pytest.raises(ValueError):
            hankel_matrix(moms, 7)


class TestThermalChainCoefficients:
    def test_kappa_inverse_p00(self):
        co = generate_thermal_coefficients(1.0, 2 * math.pi, 12, 100)
        with mp.workdps(100):
            assert abs(co.kappa_big * co.poly[0][0] - 1) < mpf("1e-90")

    def test_vacuum_limit_matches_closed_forms(self):
        co = generate_thermal_coefficients(1.0, 1e8, 52, 300)
        cv = vacuum_coefficients(1.0, 52)
        # gauge c_n -> (-1)^n c_n flips gamma's sign; |gamma| and nu compare
        assert np.abs(np.abs(co.gamma[:50]) - np.abs(cv.gamma[:50])).max() < 1e-8
        assert np.abs((co.nu[:51] - cv.nu[:51]) / cv.nu[:51]).max() < 1e-8
        assert co.kappa == pytest.approx(cv.kappa, rel=1e-8)

    def test_digit_doubling_stability(self):
        lo = generate_thermal_coefficients(1.0, 2 * math.pi, 60, 300)
        hi = generate_thermal_coefficients(1.0, 2 * math.pi, 60, 400)
        with mp.workdps(420):
            for a, b in zip(lo.gamma_big, hi.gamma_big):
                assert abs(a - b) / abs(b) < mpf("1e-50")
            for a, b in zip(lo.nu_big, hi.nu_big):
                assert abs(a - b) / abs(b) < mpf("1e-50")

    def test_dimensional_homogeneity(self):
        # fixed beta/L: gamma, nu, kappa all scale as 1/L
        a = generate_thermal_coefficients(1.0, 2 * math.pi, 16, 80)
        b = generate_thermal_coefficients(2.0, 4 * math.pi, 16, 80)
        assert np.allclose(b.gamma, a.gamma / 2, rtol=1e-12)
        assert np.allclose(b.nu, a.nu / 2, rtol=1e-12)
        assert b.kappa == pytest.approx(a.kappa / 2, rel=1e-12)

    def test_vacuum_limit_monotone_convergence(self):
        cv = vacuum_coefficients(1.0, 16)
        devs = []
        for beta in (1e2, 1e4, 1e6, 1e8):
            co = generate_thermal_coefficients(1.0, beta, 16, 80)
            devs.append(np.abs(np.abs(co.gamma) - np.abs(cv.gamma)).max())
        assert devs[0] > devs[1] > devs[2] > devs[3]

    def test_precision_exhausted_translation(self):
        with pytest.raises(PrecisionExhausted):
            generate_thermal_coefficients(1.0, 2 * math.pi, 80, 20)


class TestCoefficientCache:
    def test_round_trip(self, tmp_path):
        co = generate_thermal_coefficients(1.0, 2 * math.pi, 10, 60)
        path = os.path.join(tmp_path, "table.txt")
        write_coefficient_table(co, path)
        back = read_coefficient_table(path)
        assert back.n_modes == co.n_modes
        assert np.allclose(back.gamma, co.gamma, rtol=0, atol=0)
        assert np.allclose(back.nu, co.nu, rtol=0, atol=0)
        assert back.kappa == co.kappa
        with mp.workdps(70):
            assert abs(back.poly[9][3] - co.poly[9][3]) / abs(co.poly[9][3]) < mpf("1e-60")

    def test_cache_hit_identical(self, tmp_path):
        params = ModelParams(detector="ho", bath="thermal", beta=2 * math.pi,
                             n_modes=10)
        cold = chain_coefficients(params, PrecisionConfig(60), str(tmp_path))
        files = sorted(os.listdir(tmp_path))
        assert len(files) == 1
        first = open(os.path.join(tmp_path, files[0])).read()
        warm = chain_coefficients(params, PrecisionConfig(60), str(tmp_path))
        second = open(os.path.join(tmp_path, files[0])).read()
        assert first == second
        assert np.array_equal(cold.gamma, warm.gamma)
        assert np.array_equal(cold.nu, warm.nu)
        assert cold.kappa == warm.kappa

    def test_unruh_is_thermal_alias(self):
        pu = ModelParams(detector="ho", bath="unruh", acceleration=0.5, n_modes=8)
        pt = ModelParams(detector="ho", bath="thermal", beta=2 * math.pi / 0.5,
                         n_modes=8)
        cu = chain_coefficients(pu, PrecisionConfig(60))
        ct = chain_coefficients(pt, PrecisionConfig(60))
        assert np.array_equal(cu.gamma, ct.gamma)
        assert np.array_equal(cu.nu, ct.nu)


class TestFreeAmplitudes:
    def test_initial_condition(self):
        rho = u.free_excitation_amplitudes(0.0, 1.0, 10)
        assert rho[0] == 1.0 and np.abs(rho[1:]).max() == 0.0

    def test_normalization_and_com(self):
        for t in (0.5, 2.0, 5.0):
            rho = u.free_excitation_amplitudes(t, 1.0, 400)
            w = np.abs(rho) ** 2
            assert w.sum() == pytest.approx(1.0, abs=1e-12)
            assert (np.arange(400) * w).sum() == pytest.approx(t ** 2 / 2, rel=1e-10)
