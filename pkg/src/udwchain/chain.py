"""Chain Hamiltonian coefficients for the mapped emitter-field model.

A detector with Lorentzian spatial profile of width L couples to the even
sector of a massless scalar field.  The star-to-chain transformation turns
that into a semi-infinite nearest-neighbor bosonic chain:

* vacuum bath: the orthogonal polynomials are rescaled Laguerre polynomials
  and the tridiagonal data is closed form,
      gamma_n = -sqrt((n+2)(n+1)) / (2L),   nu_n = (n+1)/L,
      kappa   = 1 / (L sqrt(8 pi)).

* thermal bath at inverse temperature beta (and the uniformly accelerated
  detector, which reuses the same chain with beta = 2 pi / a): the weight
  function lives on the whole real line and its orthonormal polynomials are
  built numerically from the weight moments.  The moments have a polygamma
  closed form; the polynomial coefficient matrix P is the inverse Cholesky
  factor of the Hankel moment matrix, and kappa, gamma_n, nu_n follow from
  the three-term recurrence.  Coefficient magnitudes span hundreds of orders
  of magnitude, so this path runs at several hundred decimal digits.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpf, factorial

from ._version import __version__ as _VERSION
from .errors import NotPositiveDefinite, PrecisionExhausted
from .highprec import (
    PrecisionConfig,
    THERMAL_PRECISION,
    cholesky_lower,
    hurwitz_zeta_range,
    invert_lower_triangular,
)

__all__ = [
    "ModelParams",
    "ChainCoefficients",
    "MomentVector",
    "vacuum_coefficients",
    "vacuum_poly_coeffs",
    "thermal_moments",
    "thermal_poly_coeffs",
    "thermal_chain_coefficients",
    "chain_coefficients",
    "free_excitation_amplitudes",
    "write_coefficient_table",
    "read_coefficient_table",
]

CACHE_FORMAT = 1


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of one emitter-field scenario.

    Lengths are measured in units of the detector width ``length``; the
    defaults (coupling 2, gap 2 pi / 5L) are the production values used for
    all standard scenarios.
    """

    length: float = 1.0
    coupling: float = 2.0
    omega_d: float = 2 * math.pi / 5
    detector: str = "ho"          # 'ho' or 'tls'
    bath: str = "vacuum"          # 'vacuum', 'thermal' or 'unruh'
    beta: float | None = None     # thermal only
    acceleration: float | None = None  # unruh only
    n_modes: int = 250

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.coupling < 0:
            raise ValueError("coupling must be non-negative")
        if self.omega_d <= 0:
            raise ValueError("omega_d must be positive")
        if self.detector not in ("ho", "tls"):
            raise ValueError("detector must be 'ho' or 'tls'")
        if self.bath not in ("vacuum", "thermal", "unruh"):
            raise ValueError("bath must be 'vacuum', 'thermal' or 'unruh'")
        if self.bath == "thermal" and (self.beta is None or self.beta <= 0):
            raise ValueError("thermal bath needs beta > 0")
        if self.bath == "unruh" and (self.acceleration is None or self.acceleration <= 0):
            raise ValueError("unruh bath needs acceleration > 0")
        if self.n_modes < 2:
            raise ValueError("need at least 2 chain modes")

    def effective_beta(self) -> float:
        """Inverse temperature seen by the chain construction.

        A uniformly accelerated detector couples to Rindler modes in a
        thermal state at the Unruh temperature, so unruh(a) is internally
        identical to thermal(beta = 2 pi / a).
        """
        if self.bath == "vacuum":
            return math.inf
        if self.bath == "thermal":
            return float(self.beta)
        return 2 * math.pi / float(self.acceleration)


@dataclass
class ChainCoefficients:
    """Tridiagonal chain data, plus the polynomial matrix for thermal baths.

    ``gamma`` holds the N-1 hoppings inside the simulated chain;
    ``gamma_trunc`` is gamma_{N-1}, the coupling to the first *dropped* mode,
    which the truncation-error bounds need.  For thermal provenance the
    arbitrary-precision originals are kept alongside the float64 copies, and
    ``poly`` holds the (N+1)x(N+1) lower-triangular coefficient matrix P.
    """

    kappa: float
    gamma: np.ndarray
    nu: np.ndarray
    gamma_trunc: float
    n_modes: int
    provenance: dict
    poly: list | None = None
    kappa_big: object | None = None
    gamma_big: list | None = None
    nu_big: list | None = None
    gamma_trunc_big: object | None = None
    digits: int | None = None


@dataclass
class MomentVector:
    """Weight moments m_n = integral dk w(k) k^n, n = 0 .. count-1."""

    moments: list
    beta: float
    length: float
    digits: int

    @property
    def count(self) -> int:
        return len(self.moments)


# ---------------------------------------------------------------------------
# vacuum (analytic) route
# ---------------------------------------------------------------------------

def vacuum_coefficients(length: float, n_modes: int) -> ChainCoefficients:
    """Closed-form chain data for the vacuum bath."""
    n = np.arange(n_modes, dtype=float)
    nu = (n + 1.0) / length
    gamma_all = -np.sqrt((n + 2.0) * (n + 1.0)) / (2.0 * length)
    kappa = 1.0 / (length * math.sqrt(8.0 * math.pi))
    return ChainCoefficients(
        kappa=kappa,
        gamma=gamma_all[: n_modes - 1].copy(),
        nu=nu,
        gamma_trunc=float(gamma_all[n_modes - 1]),
        n_modes=n_modes,
        provenance={"kind": "analytic-vacuum", "length": length},
    )


def vacuum_poly_coeffs(n: int, length, precision: PrecisionConfig | int | None = None):
    """Monomial coefficients of the n-th vacuum chain polynomial.

    p_n(k) = (L sqrt(8 pi) / sqrt(n+1)) L^1_n(2 L k); returns the list
    [c_0, ..., c_n] with p_n(k) = sum c_i k^i at arbitrary precision.
    """
    prec = PrecisionConfig(precision) if isinstance(precision, int) else (
        precision or PrecisionConfig(60))
    with mp.workdps(prec.dps):
        ell = mp.mpmathify(length)
        front = mp.sqrt(8 * mp.pi / (n + 1))
        out = []
        for k in range(n + 1):
            c = front * mp.binomial(n + 1, n - k) * (-1) ** k * 2 ** k \
                * ell ** (k + 1) / factorial(k)
            out.append(c)
        return out


def free_excitation_amplitudes(t: float, length: float, n_modes: int) -> np.ndarray:
    """Heisenberg amplitudes rho_j(t) of a single excitation started in c_0.

    rho_j(t) = 4 sqrt(j+1) (i t/L)^j / (2 + i t/L)^(2+j) on the vacuum-sign
    chain; |rho_j|^2 is the mode-j occupation.  Evaluated in log space so
    large j and t do not overflow.
    """
    j = np.arange(n_modes)
    tau = t / length
    if tau == 0:
        out = np.zeros(n_modes, dtype=complex)
        out[0] = 1.0
        return out
    logterm = j * np.log(1j * tau) - (2 + j) * np.log(2 + 1j * tau)
    return 4 * np.sqrt(j + 1.0) * np.exp(logterm)


# ---------------------------------------------------------------------------
# thermal (numeric) route
# ---------------------------------------------------------------------------

def thermal_moments(length, beta, count: int,
                    precision: PrecisionConfig | int | None = None) -> MomentVector:
    """Weight moments of the thermal-double bath from the polygamma closed form.

    With x = 2L/beta and psi^(n+1)(x) = (-1)^n (n+1)! zeta(n+2, x):

        m_n (odd n)  = (n+1)! / (pi 2^(n+3) L^(n+2))
        m_n (even n) = (n+1)! (1 + 2 x^(n+2) zeta(n+2, 1+x)) / (pi 2^(n+3) L^(n+2))

    The even-n bracket is the shift-identity form of the closed formula;
    the literal "2 x^(n+2) zeta(n+2, x) - 1" bracket cancels catastrophically
    as beta -> infinity, this form does not.
    """
    prec = PrecisionConfig(precision) if isinstance(precision, int) else (
        precision or THERMAL_PRECISION)
    with mp.workdps(prec.dps):
        ell = mp.mpmathify(length)
        bet = mp.mpmathify(beta)
        if ell <= 0 or bet <= 0:
            raise ValueError("need L > 0 and beta > 0")
        x = 2 * ell / bet
        zs = hurwitz_zeta_range(count + 1, 1 + x, prec)
        out = []
        xpow = x * x  # x^(n+2) for n=0
        for n in range(count):
            base = factorial(n + 1) / (mp.pi * 2 ** (n + 3) * ell ** (n + 2))
            if n % 2 == 0:
                base *= 1 + 2 * xpow * zs[n + 2]
            out.append(base)
            xpow *= x
        return MomentVector(moments=out, beta=float(bet), length=float(ell),
                            digits=prec.working_digits)


def hankel_matrix(moments: MomentVector, size: int):
    if moments.count < 2 * size - 1:
        raise ValueError(f"need {2 * size - 1} moments for a {size}x{size} Hankel matrix")
    m = moments.moments
    return [[m[i + j] for j in range(size)] for i in range(size)]


def thermal_poly_coeffs(moments: MomentVector, n_modes: int,
                        precision: PrecisionConfig | int | None = None):
    """Polynomial coefficient matrix P from the Hankel moment matrix.

    P = L^-1 where M = L L^T is the Cholesky factorization of the
    (N+1)x(N+1) Hankel matrix M_ij = m_{i+j}; row n of P holds the monomial
    coefficients of the n-th orthonormal polynomial.
    """
    prec = PrecisionConfig(precision) if isinstance(precision, int) else (
        precision or PrecisionConfig(moments.digits))
    hank = hankel_matrix(moments, n_modes + 1)
    low = cholesky_lower(hank, prec)
    return invert_lower_triangular(low, prec)


def thermal_chain_coefficients(poly, length, beta,
                               digits: int | None = None) -> ChainCoefficients:
    """Chain data from the polynomial recurrence relations.

    kappa = 1/P_00, gamma_n = P_nn / P_{n+1,n+1},
    nu_n = P_{n,n-1}/P_nn - P_{n+1,n}/P_{n+1,n+1} with P_{0,-1} = 0.

    The Cholesky convention gives a positive diagonal, so these gamma_n are
    positive while the analytic vacuum gamma_n are negative; the two differ
    by the gauge c_n -> (-1)^n c_n, under which all physics is invariant.
    """
    n_modes = len(poly) - 1
    with mp.workdps((digits or 50) + 10):
        kappa_big = 1 / poly[0][0]
        gamma_big = [poly[n][n] / poly[n + 1][n + 1] for n in range(n_modes)]
        nu_big = []
        for n in range(n_modes):
            left = poly[n][n - 1] / poly[n][n] if n > 0 else mp.zero
            nu_big.append(left - poly[n + 1][n] / poly[n + 1][n + 1])
        return ChainCoefficients(
            kappa=float(kappa_big),
            gamma=np.array([float(g) for g in gamma_big[: n_modes - 1]]),
            nu=np.array([float(v) for v in nu_big]),
            gamma_trunc=float(gamma_big[n_modes - 1]),
            n_modes=n_modes,
            provenance={"kind": "numeric-thermal", "length": float(length),
                        "beta": float(beta), "digits": digits},
            poly=poly,
            kappa_big=kappa_big,
            gamma_big=gamma_big[: n_modes - 1],
            nu_big=nu_big,
            gamma_trunc_big=gamma_big[n_modes - 1],
            digits=digits,
        )


def generate_thermal_coefficients(length, beta, n_modes: int,
                                  precision: PrecisionConfig | int | None = None
                                  ) -> ChainCoefficients:
    """moments -> Hankel Cholesky -> P -> recurrence, with precision plumbing."""
    prec = PrecisionConfig(precision) if isinstance(precision, int) else (
        precision or THERMAL_PRECISION)
    moments = thermal_moments(length, beta, 2 * n_modes + 1, prec)
    try:
        poly = thermal_poly_coeffs(moments, n_modes, prec)
    except NotPositiveDefinite as exc:
        raise PrecisionExhausted(
            f"Hankel Cholesky rejected pivot {exc.k} at {prec.working_digits} digits; "
            "rerun with more digits") from exc
    return thermal_chain_coefficients(poly, length, beta, digits=prec.working_digits)


# ---------------------------------------------------------------------------
# coefficient cache (structured text, decimal strings at full precision)
# ---------------------------------------------------------------------------

def _cache_key(length, beta_over_l, n_modes, digits) -> str:
    tag = f"L{length:.12g}_bL{beta_over_l:.12g}_N{n_modes}_d{digits}_f{CACHE_FORMAT}"
    return hashlib.sha256(tag.encode()).hexdigest()[:16]


def write_coefficient_table(coeffs: ChainCoefficients, path: str) -> None:
    """Serialize a thermal coefficient table (header + one row of P per line)."""
    if coeffs.poly is None:
        raise ValueError("only numeric-thermal coefficients carry a P table")
    digits = coeffs.digits or 300
    prov = coeffs.provenance
    lines = [
        "# udwchain chain coefficient table",
        f"version: {_VERSION}",
        f"format: {CACHE_FORMAT}",
        f"L: {prov['length']:.17g}",
        f"beta: {prov['beta']:.17g}",
        f"n_modes: {coeffs.n_modes}",
        f"digits: {digits}",
        f"rows: {len(coeffs.poly)}",
    ]
    with mp.workdps(digits + 10):
        for i, row in enumerate(coeffs.poly):
            vals = " ".join(mp.nstr(row[k], digits + 10) for k in range(i + 1))
            lines.append(f"P {i} {vals}")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_coefficient_table(path: str) -> ChainCoefficients:
    header = {}
    rows = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("P "):
                _, idx, *vals = line.split()
                rows[int(idx)] = vals
            else:
                key, _, val = line.partition(":")
                header[key.strip()] = val.strip()
    digits = int(header["digits"])
    n_rows = int(header["rows"])
    with mp.workdps(digits + 10):
        poly = []
        for i in range(n_rows):
            row = [mpf(v) for v in rows[i]] + [mp.zero] * (n_rows - i - 1)
            poly.append(row)
    return thermal_chain_coefficients(
        poly, float(header["L"]), float(header["beta"]), digits=digits)


def chain_coefficients(params: ModelParams,
                       precision: PrecisionConfig | int | None = None,
                       cache_dir: str | None = None) -> ChainCoefficients:
    """Chain data for a scenario: analytic for vacuum, cached numeric otherwise."""
    if params.bath == "vacuum":
        return vacuum_coefficients(params.length, params.n_modes)
    prec = PrecisionConfig(precision) if isinstance(precision, int) else (
        precision or THERMAL_PRECISION)
    beta = params.effective_beta()
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        key = _cache_key(params.length, beta / params.length, params.n_modes,
                         prec.working_digits)
        path = os.path.join(cache_dir, f"coeffs_{key}.txt")
        if os.path.exists(path):
            coeffs = read_coefficient_table(path)
            coeffs.provenance["cache_key"] = key
            return coeffs
        coeffs = generate_thermal_coefficients(params.length, beta, params.n_modes, prec)
        write_coefficient_table(coeffs, path)
        coeffs.provenance["cache_key"] = key
        return coeffs
    return generate_thermal_coefficients(params.length, beta, params.n_modes, prec)
