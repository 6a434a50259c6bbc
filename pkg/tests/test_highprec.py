import math
import random

import numpy as np
import pytest
from mpmath import mp, mpf, mpc

import udwchain.highprec as hp
from udwchain.chain import thermal_moments, hankel_matrix
from udwchain.errors import DomainError, NotPositiveDefinite, SingularDiagonal


def residual_rel(prod, ref, dps):
    with mp.workdps(dps):
        diff = [[prod[i][j] - ref[i][j] for j in range(len(ref))] for i in range(len(ref))]
        return hp.frobenius_norm(diff) / hp.frobenius_norm(ref)


class TestCholesky:
    def test_identity(self):
        low = hp.cholesky_lower([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
        assert residual_rel(low, hp.big_identity(3), 60) == 0

    def test_2x2_closed_form(self):
        low = hp.cholesky_lower([[4, 2], [2, 3]], hp.PrecisionConfig(40))
        with mp.workdps(50):
            assert abs(low[0][0] - 2) < mpf("1e-38")
            assert abs(low[1][0] - 1) < mpf("1e-38")
            assert abs(low[1][1] - mp.sqrt(2)) < mpf("1e-38")
            assert low[0][1] == 0

    def test_thermal_moment_matrix_residual(self):
        # 201x201 Hankel at beta = 2 pi L, 300 digits; residual checked with
        # the product re-accumulated at doubled precision
        n = 200
        moments = thermal_moments(1.0, 2 * math.pi, 2 * n + 1, 300)
        m = hankel_matrix(moments, n + 1)
        low = hp.cholesky_lower(m, hp.PrecisionConfig(300))
        with mp.workdps(600):
            lt = hp.big_transpose(low)
            prod = hp.big_matmul(low, lt)
            rel = residual_rel(prod, m, 600)
        assert rel < mpf("1e-290")

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            hp.cholesky_lower([[1, 2], [2, 1]])

    def test_precision_starvation_raises(self):
        # the N=80 Hankel cancels ~47 digits; 20 working digits cannot survive
        moments = thermal_moments(1.0, 2 * math.pi, 161, 20)
        m = hankel_matrix(moments, 81)
        with pytest.raises(NotPositiveDefinite):
            hp.cholesky_lower(m, hp.PrecisionConfig(20))


class TestTriangularInverse:
    def test_identity(self):
        inv = hp.invert_lower_triangular(hp.big_identity(4))
        assert residual_rel(inv, hp.big_identity(4), 60) == 0

    def test_2x2_closed_form(self):
        with mp.workdps(50):
            low = [[mpf(2), mp.zero], [mp.one, mp.sqrt(2)]]
            inv = hp.invert_lower_triangular(low, hp.PrecisionConfig(40))
            assert abs(inv[0][0] - mpf("0.5")) < mpf("1e-38")
            assert abs(inv[1][0] + 1 / (2 * mp.sqrt(2))) < mpf("1e-38")
            assert abs(inv[1][1] - 1 / mp.sqrt(2)) < mpf("1e-38")

    def test_random_100x100_residual(self):
        rng = random.Random(11)
        n = 100
        low = [[mpf(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i):
                low[i][j] = mpf(rng.uniform(-1, 1))
            low[i][i] = mpf(rng.uniform(1, 2))
        inv = hp.invert_lower_triangular(low, hp.PrecisionConfig(200))
        with mp.workdps(220):
            prod = hp.big_matmul(low, inv)
            rel = residual_rel(prod, hp.big_identity(n), 220)
        assert rel < mpf("1e-190")

    def test_singular_diagonal(self):
        with pytest.raises(SingularDiagonal):
            hp.invert_lower_triangular([[1, 0], [1, 0]])


class TestMatrixExponential:
    def test_zero_matrix(self):
        e = hp.matrix_exponential([[0, 0], [0, 0]], t=3.7)
        assert residual_rel(e, hp.big_identity(2), 60) == 0

    def test_quarter_turn(self):
        # [[0,1],[-1,0]] generates rotations; at t = pi/2 the matrix itself
        with mp.workdps(60):
            quarter = mp.pi / 2
        e = hp.matrix_exponential([[0, 1], [-1, 0]], t=quarter,
                                  precision=hp.PrecisionConfig(40))
        with mp.workdps(50):
            target = [[mp.zero, mp.one], [-mp.one, mp.zero]]
            diff = hp.frobenius_norm([[e[i][j] - target[i][j] for j in range(2)]
                                      for i in range(2)])
            assert diff < mpf("1e-36")

    def test_group_law_random(self):
        rng = random.Random(3)
        n = 20
        k = [[rng.uniform(-1, 1) for _ in range(n)] for _ in range(n)]
        prec = hp.PrecisionConfig(40)
        e2 = hp.matrix_exponential(k, t=0.8, precision=prec)
        e1 = hp.matrix_exponential(k, t=0.4, precision=prec)
        with mp.workdps(prec.dps):
            sq = hp.big_matmul(e1, e1)
            rel = residual_rel(sq, e2, prec.dps)
        assert rel < mpf(10) ** (-(prec.working_digits - 8))

    def test_symplectic_residual_small_chain(self):
        # vacuum chain generator at big precision: exp(tK) must be symplectic
        from udwchain.chain import ModelParams, vacuum_coefficients
        from udwchain.gaussian import build_generator, symplectic_form
        n = 12
        params = ModelParams(detector="ho", coupling=2.0, n_modes=n)
        gen = build_generator(params, vacuum_coefficients(1.0, n))
        prec = hp.PrecisionConfig(40)
        s = hp.matrix_exponential(gen.k, t=1.3, precision=prec)
        with mp.workdps(prec.dps):
            om = hp.big_from_rows(symplectic_form(n + 1))
            lhs = hp.big_matmul(hp.big_matmul(s, om), hp.big_transpose(s))
            rel = residual_rel(lhs, om, prec.dps)
        assert rel < mpf("1e-30")


class TestPolygamma:
    def test_trigamma_at_one(self):
        with mp.workdps(60):
            assert abs(hp.polygamma(1, 1) - mp.pi ** 2 / 6) < mpf("1e-45")

    def test_tetragamma_at_one(self):
        with mp.workdps(60):
            assert abs(hp.polygamma(2, 1) + 2 * mp.zeta(3)) < mpf("1e-45")

    def test_against_series_oracle(self):
        # direct summation of sum_k (m!)/(x+k)^(m+1) with an integral tail
        prec = hp.PrecisionConfig(300)
        x = 1 / mp.pi
        ours = hp.polygamma(1, x, prec)
        with mp.workdps(40):
            terms = 200000
            partial = mp.fsum(1 / (x + k) ** 2 for k in range(terms))
            tail = 1 / (x + terms) + mpf("0.5") / (x + terms) ** 2
            crude = partial + tail
            assert abs(ours - crude) / abs(ours) < mpf("1e-10")
        with mp.workdps(320):
            ref = mp.polygamma(1, x)
            assert abs(ours - ref) / abs(ref) < mpf(10) ** (-(300 - 4))

    def test_domain(self):
        with pytest.raises(DomainError):
            hp.polygamma(1, -1.0)


class TestHurwitzZeta:
    def test_basel(self):
        with mp.workdps(60):
            assert abs(hp.hurwitz_zeta(2, 1) - mp.pi ** 2 / 6) < mpf("1e-45")

    def test_shift_identity_complex(self):
        prec = hp.PrecisionConfig(40)
        a = mpc("0.7", "0.3")
        with mp.workdps(prec.dps):
            lhs = hp.hurwitz_zeta(3, a, prec) - hp.hurwitz_zeta(3, a + 1, prec)
            assert abs(lhs - a ** -3) < mpf("1e-35")

    def test_against_partial_sum_oracle(self):
        a = mpc("0.2", "1.5")
        ours = hp.hurwitz_zeta(4, a, hp.PrecisionConfig(40))
        with mp.workdps(40):
            terms = 20000
            partial = mp.fsum((a + k) ** -4 for k in range(terms))
            z = a + terms
            tail = z ** -3 / 3 + z ** -4 / 2  # Euler-Maclaurin head of the tail
            assert abs(ours - (partial + tail)) / abs(ours) < mpf("1e-12")
        with mp.workdps(60):
            ref = mp.zeta(4, a)
            assert abs(ours - ref) / abs(ref) < mpf("1e-36")

    def test_shift_identity_many_random(self):
        rng = random.Random(5)
        prec = hp.PrecisionConfig(30)
        with mp.workdps(prec.dps):
            for _ in range(1000):
                s = rng.randint(2, 12)
                a = mpc(rng.uniform(0.05, 3.0), rng.uniform(-2.0, 2.0))
                zs = hp.hurwitz_zeta_range(s, a, prec)
                zs1 = hp.hurwitz_zeta_range(s, a + 1, prec)
                assert abs(zs[s] - zs1[s] - a ** -s) <= mpf("1e-25") * (1 + abs(zs[s]))

    def test_domain(self):
        with pytest.raises(DomainError):
            hp.hurwitz_zeta(3, mpc(-0.5, 1.0))

    def test_doubling_stability(self):
        a = mpc("0.03", "0.8")
        lo = hp.hurwitz_zeta(7, a, hp.PrecisionConfig(50))
        hi = hp.hurwitz_zeta(7, a, hp.PrecisionConfig(100))
        assert abs(lo - hi) / abs(hi) < mpf("1e-44")


class TestWeightMomentOracle:
    def test_vacuum_limit_n0(self):
        # beta -> infinity surrogate: m_0 -> 1!/(pi 2^3 L^2)
        val = hp.integrate_weight_moment_numeric(0, 1.0, 1e8)
        with mp.workdps(40):
            target = 1 / (8 * mp.pi)
            assert abs(val - target) / target < mpf("1e-7")

    def test_odd_moment_finite_nonzero(self):
        # odd moments keep only the parity-even part of the integrand and
        # equal the vacuum value (n+1)!/(pi 2^(n+3) L^(n+2)) for every beta
        for beta in (2 * math.pi, 7.0):
            val = hp.integrate_weight_moment_numeric(3, 1.0, beta)
            with mp.workdps(40):
                target = mp.factorial(4) / (mp.pi * 2 ** 6)
                assert abs(val - target) / target < mpf("1e-18")
                assert val > 0

    def test_matches_closed_form_n4(self):
        val = hp.integrate_weight_moment_numeric(4, 1.0, 2 * math.pi,
                                                 precision=hp.PrecisionConfig(50))
        closed = thermal_moments(1.0, 2 * math.pi, 5, 60).moments[4]
        with mp.workdps(60):
            assert abs(val - closed) / abs(closed) < mpf("1e-20")
