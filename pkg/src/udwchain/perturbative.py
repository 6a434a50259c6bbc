"""Leading-order emitted energy density (the small-coupling oracle).

Time-dependent perturbation theory at order lambda^2 gives the right-moving
density as one single and one nested time integral with closed-form
integrands built from 1/(L +- i(x + t'))^2 and detector phases e^{+-i Omega
t'}; the spatial argument is a null coordinate, so the profile at time t is
the formula evaluated at x - t.  Both the |first-order|^2 term and the
interference of the initial state with the second-order correction are kept.

The integrands are analytic in a strip around [0, t], so both integrals are
evaluated with Chebyshev series (coefficients by DCT, antiderivatives in
coefficient space); the nested integral uses the series antiderivative of
the inner factor.  A non-decaying coefficient tail raises
QuadratureNonConvergence instead of returning garbage.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy.fft import dct

from .chain import ModelParams
from .errors import QuadratureNonConvergence
from .observables import DensityProfile

__all__ = ["perturbative_density"]

_MAX_DEGREE = 4096
_TAIL_TOL = 1e-11


def _cheb_fit(values):
    """Chebyshev coefficients from samples at the extrema cos(pi j / n)."""
    n = values.shape[0] - 1
    coeffs = dct(values.real, type=1, axis=0) / n + 1j * dct(values.imag, type=1, axis=0) / n
    coeffs[0] /= 2
    coeffs[-1] /= 2
    return coeffs


def _tail_ok(coeffs):
    mag = np.abs(coeffs)
    top = mag.max(axis=0)
    tail = mag[-4:].max(axis=0)
    return np.all(tail <= _TAIL_TOL * np.maximum(top, 1e-300))


def _definite_integral(coeffs, half_width):
    anti = _cheb.chebint(coeffs, axis=0)
    return half_width * (_cheb.chebval(1.0, anti) - _cheb.chebval(-1.0, anti))


class _ChebPanel:
    """Shared Chebyshev grid on [0, t] for a batch of x values."""

    def __init__(self, t, degree):
        self.t = t
        self.nodes_std = np.cos(np.pi * np.arange(degree + 1) / degree)
        self.tp = t * (self.nodes_std + 1.0) / 2.0  # ascending in -cos order? no: descending
        self.half = t / 2.0

    def integral(self, values):
        return _definite_integral(_cheb_fit(values), self.half)

    def nested_integral(self, h_values, v_values):
        """integral_0^t h(t') [integral_0^{t'} v(t'') dt''] dt'."""
        cv = _cheb_fit(v_values)
        anti = _cheb.chebint(cv, lbnd=-1.0, axis=0)
        # chebval puts the coefficient axis first and returns (..., n_nodes)
        v_cum = self.half * _cheb.chebval(self.nodes_std, anti)
        if v_cum.ndim > 1:
            v_cum = v_cum.T  # back to (n_nodes, nx)
        w = h_values * v_cum
        cw = _cheb_fit(w)
        if not (_tail_ok(cv) and _tail_ok(cw)):
            raise QuadratureNonConvergence("chebyshev tail did not decay")
        return _definite_integral(cw, self.half)

    def checked_integral(self, values):
        c = _cheb_fit(values)
        if not _tail_ok(c):
            raise QuadratureNonConvergence("chebyshev tail did not decay")
        return _definite_integral(c, self.half)


def _emission_kernels(xnull, tp, length, omega):
    """plus[j, s] = e^{i s Omega t_j}/(L + i(x + t_j))^2 and the conjugate-pole kernel."""
    z = xnull[None, :] + tp[:, None]
    plus_pole = 1.0 / (length + 1j * z) ** 2
    minus_pole = 1.0 / (length - 1j * z) ** 2
    phase = np.exp(1j * omega * tp)[:, None]
    return plus_pole, minus_pole, phase


def perturbative_density(params: ModelParams, x_grid, t: float,
                         detector_kind: str | None = None,
                         initial: str = "ground",
                         mover: str = "right") -> DensityProfile:
    """Order-lambda^2 energy density profile at time t.

    ``initial`` is 'ground' or 'excited' (Fock 0/1 for the harmonic
    detector).  The value is a valid leading-order answer for any coupling;
    it is *accurate* only while lambda^2 corrections dominate.
    """
    kind = detector_kind or params.detector
    if kind not in ("tls", "ho"):
        raise ValueError("detector_kind must be 'tls' or 'ho'")
    if initial not in ("ground", "excited"):
        raise ValueError("initial must be 'ground' or 'excited'")
    if mover not in ("left", "right"):
        raise ValueError("mover must be 'left' or 'right'")
    x_grid = np.asarray(x_grid, dtype=float)
    lam, omega, length = params.coupling, params.omega_d, params.length
    if t == 0 or lam == 0:
        return DensityProfile(x=x_grid, values=np.zeros_like(x_grid), mover=mover,
                              scenario="perturbative", time=float(t))
    xe = -x_grid if mover == "left" else x_grid
    xnull = xe - t

    degree = 256
    while True:
        panel = _ChebPanel(t, degree)
        plus_pole, minus_pole, phase = _emission_kernels(xnull, panel.tp, length, omega)
        try:
            if kind == "tls":
                sgn = 1.0 if initial == "excited" else -1.0
                ph = phase if sgn > 0 else phase.conj()
                s1 = panel.checked_integral(ph * plus_pole)
                d2 = panel.nested_integral(ph * minus_pole, ph.conj() * minus_pole)
                vals = (lam ** 2 / (8 * math.pi ** 2)) * np.abs(s1) ** 2 \
                    - (lam ** 2 / (4 * math.pi ** 2)) * np.real(d2)
            else:
                nocc = 1 if initial == "excited" else 0
                s1_plus = panel.checked_integral(phase * plus_pole)
                s1_minus = panel.checked_integral(phase.conj() * plus_pole)
                d2 = (nocc * panel.nested_integral(phase * minus_pole,
                                                   phase.conj() * minus_pole)
                      + (nocc + 1) * panel.nested_integral(phase.conj() * minus_pole,
                                                           phase * minus_pole))
                vals = (lam ** 2 / (8 * math.pi ** 2)) * (
                    nocc * np.abs(s1_plus) ** 2 + (nocc + 1) * np.abs(s1_minus) ** 2) \
                    - (lam ** 2 / (4 * math.pi ** 2)) * np.real(d2)
            break
        except QuadratureNonConvergence:
            degree *= 2
            if degree > _MAX_DEGREE:
                raise
    return DensityProfile(x=x_grid, values=vals, mover=mover,
                          scenario="perturbative", time=float(t))
