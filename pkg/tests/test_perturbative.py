import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from udwchain.chain import ModelParams
from udwchain.perturbative import perturbative_density


def params_for(kind, coupling=0.01):
    return ModelParams(detector=kind, coupling=coupling,
                       omega_d=2 * math.pi / 5, n_modes=10)


def dblquad_reference(kind, initial, coupling, x_phys, t):
    """Brute-force adaptive quadrature of the leading-order formulas."""
    lam, omega, length = coupling, 2 * math.pi / 5, 1.0
    x = x_phys - t  # null coordinate

    def s1(sigma):
        f_re = quad(lambda tp: (np.exp(1j * sigma * omega * tp)
                                / (length + 1j * (x + tp)) ** 2).real, 0, t,
                    limit=400)[0]
        f_im = quad(lambda tp: (np.exp(1j * sigma * omega * tp)
                                / (length + 1j * (x + tp)) ** 2).imag, 0, t,
                    limit=400)[0]
        return f_re + 1j * f_im

    def d2(sig_h, sig_v):
        def f(tpp, tp, fn):
            val = (np.exp(1j * sig_h * omega * tp) * np.exp(1j * sig_v * omega * tpp)
                   / ((length - 1j * (x + tp)) ** 2 * (length - 1j * (x + tpp)) ** 2))
            return fn(val)
        re = dblquad(f, 0, t, 0, lambda tp: tp, args=(np.real,), epsabs=1e-13)[0]
        im = dblquad(f, 0, t, 0, lambda tp: tp, args=(np.imag,), epsabs=1e-13)[0]
        return re + 1j * im

    if kind == "tls":
        sigma = 1.0 if initial == "excited" else -1.0
        return (lam ** 2 / (8 * math.pi ** 2) * abs(s1(sigma)) ** 2
                - lam ** 2 / (4 * math.pi ** 2) * np.real(d2(sigma, -sigma)))
    nocc = 1 if initial == "excited" else 0
    term1 = (lam ** 2 / (8 * math.pi ** 2)
             * (nocc * abs(s1(+1)) ** 2 + (nocc + 1) * abs(s1(-1)) ** 2))
    term2 = (lam ** 2 / (4 * math.pi ** 2)
             * np.real(nocc * d2(+1, -1) + (nocc + 1) * d2(-1, +1)))
    return term1 - term2


class TestTrivialLimits:
    def test_zero_coupling(self):
        prof = perturbative_density(params_for("tls", coupling=0.0),
                                    np.linspace(-2, 2, 9), 3.0)
        assert np.abs(prof.values).max() == 0.0

    def test_zero_time(self):
        prof = perturbative_density(params_for("ho"), np.linspace(-2, 2, 9), 0.0)
        assert np.abs(prof.values).max() == 0.0


class TestAgainstAdaptiveQuadrature:
    @pytest.mark.parametrize("kind,initial", [
        ("tls", "ground"), ("tls", "excited"), ("ho", "ground"), ("ho", "excited")])
    def test_pointwise(self, kind, initial):
        t = 3.0
        xs = np.array([0.4, 1.7])
        prof = perturbative_density(params_for(kind), xs, t, initial=initial)
        for i, x in enumerate(xs):
            ref = dblquad_reference(kind, initial, 0.01, x, t)
            assert prof.values[i] == pytest.approx(ref, rel=1e-9, abs=1e-18)


class TestStructure:
    def test_mirror_mover(self):
        xs = np.linspace(-4, 4, 17)
        p = params_for("tls")
        left = perturbative_density(p, xs, 2.0, initial="excited", mover="left")
        right = perturbative_density(p, -xs, 2.0, initial="excited", mover="right")
        assert np.abs(left.values - right.values).max() < 1e-15

    def test_causal_support(self):
        # the pulse lives in x in [-L-ish, t]; ahead only Lorentzian tails remain
        p = params_for("tls", coupling=0.1)
        t = 3.0
        prof = perturbative_density(p, np.array([1.0, 20.0]), t, initial="excited")
        assert abs(prof.values[1]) < 1e-5 * abs(prof.values[0])

    def test_quadratic_coupling_scaling(self):
        xs = np.array([1.0])
        t = 3.0
        a = perturbative_density(params_for("tls", 0.01), xs, t, initial="excited")
        b = perturbative_density(params_for("tls", 0.02), xs, t, initial="excited")
        assert b.values[0] == pytest.approx(4 * a.values[0], rel=1e-12)
