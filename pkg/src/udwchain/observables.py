"""Field energy densities reconstructed from chain-mode second moments.

The left/right-moving energy densities of the 1+1D massless field are
bilinear in the chain ladder operators, so every profile here is a
contraction of <c_i^dag c_j> and <c_i c_j> with precomputed coefficient
tables:

* vacuum bath at rest: closed arctan-form coefficients, double precision;
* thermal bath at rest: coefficients I^k built from Hurwitz zeta functions
  with theta = 2/beta, contracted with the polynomial matrix P at high
  precision (the contraction cancels hundreds of digits -- the digit-loss
  audit tracks how many survive);
* uniformly accelerated detector: Minkowski densities on the t=0 hyperplane
  from the chain run at beta = 2 pi / a, with its own zeta-based I^k table;
* the Lorentz boost of a resting profile, the light-ray source-term
  diagnostic, and the thermal background constant.

The raw truncated background term of the thermal reconstruction converges
only weakly in the number of chain modes, so by default it is replaced by
the exact even-sector value pi/(24 beta^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp, mpf, factorial

from .errors import DomainError, GridMismatch, OutOfRange, PrecisionExhausted
from .highprec import PrecisionConfig, hurwitz_zeta_range

__all__ = [
    "SecondMoments",
    "DensityProfile",
    "ReconstructionTable",
    "vacuum_density",
    "total_density_at_rest",
    "thermal_background",
    "even_sector_background",
    "thermal_reconstruction_table",
    "thermal_density",
    "unruh_reconstruction_table",
    "unruh_density",
    "boost_resting_density",
    "source_term",
    "quiet_zone_statistic",
    "default_rest_grid",
    "default_unruh_grid",
    "write_profile_csv",
    "read_profile_csv",
]


@dataclass
class SecondMoments:
    """The dynamics -> observables interface: <c_i^dag c_j> and <c_i c_j>."""

    nmat: np.ndarray
    amat: np.ndarray
    time: float
    provenance: dict = field(default_factory=dict)

    @property
    def n_modes(self) -> int:
        return self.nmat.shape[0]

    def validate(self, tol=1e-8):
        if np.abs(self.nmat - self.nmat.conj().T).max() > tol:
            raise ValueError("nmat is not Hermitian")
        if np.abs(self.amat - self.amat.T).max() > tol:
            raise ValueError("amat is not symmetric")


@dataclass
class DensityProfile:
    """Energy density per unit length on a spatial grid (units of L)."""

    x: np.ndarray
    values: np.ndarray
    mover: str          # 'left', 'right' or 'total'
    scenario: str
    time: float
    digit_audit: float | None = None

    def interpolate(self, x):
        order = np.argsort(self.x)
        return np.interp(x, self.x[order], self.values[order])


@dataclass
class ReconstructionTable:
    """Per-x contraction vectors u_i(x) = sum_k P_ik I_k(x), plus audit data.

    Building the table is the expensive, precision-hungry step; applying it
    to a run's second moments is a cheap double-precision bilinear form.
    """

    scenario: str
    mover: str
    x: np.ndarray
    u: np.ndarray                     # complex (nx, N)
    raw_constant: np.ndarray | None   # thermal only; per-x truncated background
    digits: int
    digits_lost: float
    meta: dict = field(default_factory=dict)

    @property
    def digits_surviving(self) -> float:
        return self.digits - self.digits_lost


def default_rest_grid(length: float = 1.0) -> np.ndarray:
    """481 uniform points on [-12L, 12L]."""
    return np.linspace(-12 * length, 12 * length, 481)


def default_unruh_grid(length: float = 1.0, count: int = 400) -> np.ndarray:
    """Log-uniform points on [1e-2 L, 1e2 L]; x = 0 is singular and excluded."""
    return np.geomspace(1e-2 * length, 1e2 * length, count)


# ---------------------------------------------------------------------------
# vacuum bath at rest
# ---------------------------------------------------------------------------

def _vacuum_phase_matrix(x_grid: np.ndarray, length: float, n_modes: int):
    phi = np.arctan(np.asarray(x_grid, dtype=float) / length)[:, None]
    i = np.arange(n_modes)[None, :]
    s = (-1.0) ** i * np.sqrt(i + 1.0) * np.exp(2j * i * phi)
    pref = 1.0 / (math.pi * length ** 2 * (1.0 + (np.asarray(x_grid) / length) ** 2) ** 2)
    return s, np.exp(4j * phi[:, 0]), pref


def vacuum_density(moments: SecondMoments, x_grid, length: float,
                   mover: str = "right") -> DensityProfile:
    """Right-moving normal-ordered density for a vacuum-bath run at rest.

    <:pi_-^2(x):> = Re sum_ij (-1)^(i+j) sqrt((i+1)(j+1)) /
                    (pi L^2 (1+x^2/L^2)^2) *
                    [ e^{2i(j-i) arctan(x/L)} <c_i^dag c_j>
                      + e^{i(4+2i+2j) arctan(x/L)} <c_i c_j> ]

    The left mover is the mirror image, evaluated here as right(-x).
    """
    if mover not in ("left", "right"):
        raise ValueError("mover must be 'left' or 'right'")
    x_grid = np.asarray(x_grid, dtype=float)
    xe = -x_grid if mover == "left" else x_grid
    s, e4, pref = _vacuum_phase_matrix(xe, length, moments.n_modes)
    t_normal = np.einsum("xi,ij,xj->x", s.conj(), moments.nmat, s)
    t_anom = e4 * np.einsum("xi,ij,xj->x", s, moments.amat, s)
    vals = pref * np.real(t_normal + t_anom)
    return DensityProfile(x=x_grid, values=vals, mover=mover,
                          scenario="vacuum-rest", time=moments.time)


def total_density_at_rest(moments: SecondMoments, x_grid, length: float) -> DensityProfile:
    """T_00 expectation value: sum of the two movers."""
    right = vacuum_density(moments, x_grid, length, "right")
    left = vacuum_density(moments, x_grid, length, "left")
    return DensityProfile(x=np.asarray(x_grid, dtype=float),
                          values=right.values + left.values,
                          mover="total", scenario="vacuum-rest", time=moments.time)


# ---------------------------------------------------------------------------
# thermal bath at rest
# ---------------------------------------------------------------------------

def thermal_background(beta: float) -> float:
    """Thermal energy density of the free field, pi / (12 beta^2)."""
    if beta <= 0:
        raise DomainError("beta must be positive")
    return math.pi / (12.0 * beta ** 2)


def even_sector_background(beta: float) -> float:
    """Even-sector half of the background; the odd sector holds the rest."""
    return thermal_background(beta) / 2.0


def _poly_rows_float_ok(poly, n_modes):
    if poly is None:
        raise ValueError("thermal reconstruction needs the polynomial matrix P")
    if len(poly) < n_modes:
        raise ValueError("P has fewer rows than chain modes")


def thermal_i_factors(k_max: int, x, beta, length,
                      precision: PrecisionConfig | int) -> tuple:
    """The integrals I^k_{-,+} and I^k_{-,-} for one position x.

    I^k_{-,+} = theta^{k+2} (k+1)! / (2^{k+3} pi) zeta[k+2, (L+ix) theta/2]
    I^k_{-,-} = same with the zeta argument shifted by +1,

    theta = 2/beta.  The '+x' index pair follows by complex conjugation.
    Returned as two lists of mpc, k = 0 .. k_max.
    """
    prec = PrecisionConfig(precision) if isinstance(precision, int) else precision
    with mp.workdps(prec.dps + 10):
        theta = 2 / mp.mpmathify(beta)
        a = (mp.mpmathify(length) + mp.mpc(0, 1) * mp.mpmathify(x)) * theta / 2
        zs = hurwitz_zeta_range(k_max + 2, a, prec)
        inv = 1 / a
        apow = inv  # a^{-(k+1)}
        im_plus, im_minus = [], []
        for k in range(k_max + 1):
            apow *= inv  # a^{-(k+2)}
            coef = theta ** (k + 2) * factorial(k + 1) / (2 ** (k + 3) * mp.pi)
            zp = zs[k + 2]
            im_plus.append(coef * zp)
            im_minus.append(coef * (zp - apow))  # zeta(s, a+1) = zeta(s, a) - a^-s
        return im_plus, im_minus


def thermal_reconstruction_table(poly, beta, length, x_grid,
                                 n_modes: int | None = None,
                                 mover: str = "right",
                                 precision: PrecisionConfig | int | None = None
                                 ) -> ReconstructionTable:
    """High-precision contraction table for the thermal-rest reconstruction.

    For each grid point the vectors

        u_i = sum_k P_ik (I^k_{-,+} + (-1)^k conj(I^k_{-,-}))
        w_i = sum_l P_il (-1)^l I^l_{-,-}

    are contracted at working precision; u is stored in double precision for
    the later bilinear form with the run's second moments, and the raw
    truncated background 0.5 Re sum_i u_i w_i is kept per grid point.  The
    digit-loss audit compares the largest |P_ik I_k| term against the
    largest surviving |u_i|.
    """
    if mover not in ("left", "right"):
        raise ValueError("mover must be 'left' or 'right'")
    prec = PrecisionConfig(precision) if isinstance(precision, int) else (
        precision or PrecisionConfig(300))
    x_grid = np.asarray(x_grid, dtype=float)
    if n_modes is None:
        n_modes = len(poly) - 1
    _poly_rows_float_ok(poly, n_modes)
    xe = -x_grid if mover == "left" else x_grid
    u_out = np.empty((len(x_grid), n_modes), dtype=complex)
    raw = np.empty(len(x_grid))
    worst_lost = 0.0
    with mp.workdps(prec.dps + 10):
        for ix, x in enumerate(xe):
            im_plus, im_minus = thermal_i_factors(n_modes - 1, mpf(x), beta, length, prec)
            alpha = [im_plus[k] + (-1) ** k * mp.conj(im_minus[k])
                     for k in range(n_modes)]
            wvec = [(-1) ** l * im_minus[l] for l in range(n_modes)]
            max_term = mp.zero
            max_u = mp.zero
            const = mp.zero
            for i in range(n_modes):
                row = poly[i]
                terms = [row[k] * alpha[k] for k in range(i + 1)]
                u_i = mp.fsum(terms)
                local = max(abs(t) for t in terms)
                if local > max_term:
                    max_term = local
                if abs(u_i) > max_u:
                    max_u = abs(u_i)
                w_i = mp.fsum(row[l] * wvec[l] for l in range(i + 1))
                const += u_i * w_i
                u_out[ix, i] = complex(u_i)
            raw[ix] = float(0.5 * mp.re(const))
            if max_term > 0 and max_u > 0:
                lost = float(mp.log10(max_term / max_u))
                worst_lost = max(worst_lost, lost)
    table = ReconstructionTable(scenario="thermal-rest", mover=mover, x=x_grid,
                                u=u_out, raw_constant=raw,
                                digits=prec.working_digits, digits_lost=worst_lost,
                                meta={"beta": float(beta), "length": float(length),
                                      "n_modes": n_modes})
    if table.digits_surviving < 10:
        raise PrecisionExhausted(
            f"thermal table lost {worst_lost:.0f} of {prec.working_digits} digits")
    return table


def thermal_density(moments: SecondMoments, table: ReconstructionTable,
                    raw_constant: bool = False,
                    include_odd_background: bool = False) -> DensityProfile:
    """Even-sector density of a thermal-rest run, plus its background.

    The truncated constant term of the reconstruction converges only weakly
    with the chain length, so by default it is replaced by the exact
    even-sector value pi/(24 beta^2); ``raw_constant=True`` exposes the
    truncated value for diagnostics.  ``include_odd_background`` adds the
    time-independent odd-sector half to give the full physical density.
    """
    if table.scenario != "thermal-rest":
        raise ValueError("table was not built for the thermal-rest scenario")
    if moments.n_modes < table.u.shape[1]:
        raise ValueError("moments have fewer modes than the table")
    n = table.u.shape[1]
    nmat = moments.nmat[:n, :n]
    amat = moments.amat[:n, :n]
    u = table.u
    t_normal = np.einsum("xi,ij,xj->x", u, nmat, u.conj())
    t_anom = np.einsum("xi,ij,xj->x", u.conj(), amat, u.conj())
    vals = 0.5 * np.real(t_normal + t_anom)
    beta = table.meta["beta"]
    vals = vals + (table.raw_constant if raw_constant
                   else even_sector_background(beta) * np.ones_like(vals))
    if include_odd_background:
        vals = vals + even_sector_background(beta)
    return DensityProfile(x=table.x, values=vals, mover=table.mover,
                          scenario="thermal-rest", time=moments.time,
                          digit_audit=table.digits_surviving)


# ---------------------------------------------------------------------------
# uniformly accelerated detector (Minkowski density on the t=0 hyperplane)
# ---------------------------------------------------------------------------

def unruh_i_factors(k_max: int, x, acceleration, length, mover: str,
                    precision: PrecisionConfig | int) -> list:
    """Coefficients I^k(x) of the Minkowski-density reconstruction, x > 0.

    With s = +1 for the left mover and s = -1 for the right mover:

        I^k(x) = i a^{k+1} (k+1)! / ((2 pi)^{k+3} x sqrt(2)) *
                 ( zeta[k+2, (aL + s i ln(ax))/(2 pi)]
                   + (-1)^k zeta[k+2, (aL - s i ln(ax))/(2 pi) + 1] )

    Valid on the right Rindler wedge hyperplane t = 0 only.
    """
    if mover not in ("left", "right"):
        raise ValueError("mover must be 'left' or 'right'")
    prec = PrecisionConfig(precision) if isinstance(precision, int) else precision
    if x <= 0:
        raise DomainError("the accelerated-detector reconstruction needs x > 0")
    sgn = 1 if mover == "left" else -1
    with mp.workdps(prec.dps + 10):
        acc = mp.mpmathify(acceleration)
        xx = mp.mpmathify(x)
        arg = (acc * mp.mpmathify(length) + sgn * mp.mpc(0, 1) * mp.log(acc * xx)) / (2 * mp.pi)
        zs = hurwitz_zeta_range(k_max + 2, arg, prec)
        inv = 1 / arg
        apow = inv
        out = []
        for k in range(k_max + 1):
            apow *= inv  # arg^{-(k+2)}
            pref = mp.mpc(0, 1) * acc ** (k + 1) * factorial(k + 1) \
                / ((2 * mp.pi) ** (k + 3) * xx * mp.sqrt(2))
            # zeta(s, conj(arg)+1) = conj(zeta(s, arg) - arg^-s)
            out.append(pref * (zs[k + 2] + (-1) ** k * mp.conj(zs[k + 2] - apow)))
        return out


def unruh_reconstruction_table(poly, acceleration, length, x_grid,
                               n_modes: int | None = None,
                               mover: str = "left",
                               precision: PrecisionConfig | int | None = None
                               ) -> ReconstructionTable:
    """Contraction table u_i(x) = sum_k P_ik I^k(x) for the Unruh scenario."""
    prec = PrecisionConfig(precision) if isinstance(precision, int) else (
        precision or PrecisionConfig(300))
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(x_grid <= 0):
        raise DomainError("x grid must be strictly positive (right Rindler wedge)")
    if n_modes is None:
        n_modes = len(poly) - 1
    _poly_rows_float_ok(poly, n_modes)
    u_out = np.empty((len(x_grid), n_modes), dtype=complex)
    worst_lost = 0.0
    with mp.workdps(prec.dps + 10):
        for ix, x in enumerate(x_grid):
            ik = unruh_i_factors(n_modes - 1, mpf(x), acceleration, length, mover, prec)
            max_term = mp.zero
            max_u = mp.zero
            for i in range(n_modes):
                row = poly[i]
                terms = [row[k] * ik[k] for k in range(i + 1)]
                u_i = mp.fsum(terms)
                local = max(abs(t) for t in terms)
                if local > max_term:
                    max_term = local
                if abs(u_i) > max_u:
                    max_u = abs(u_i)
                u_out[ix, i] = complex(u_i)
            if max_term > 0 and max_u > 0:
                worst_lost = max(worst_lost, float(mp.log10(max_term / max_u)))
    table = ReconstructionTable(scenario="unruh", mover=mover, x=x_grid,
                                u=u_out, raw_constant=None,
                                digits=prec.working_digits, digits_lost=worst_lost,
                                meta={"acceleration": float(acceleration),
                                      "length": float(length), "n_modes": n_modes})
    if table.digits_surviving < 10:
        raise PrecisionExhausted(
            f"unruh table lost {worst_lost:.0f} of {prec.working_digits} digits")
    return table


def unruh_density(moments: SecondMoments, table: ReconstructionTable) -> DensityProfile:
    """<:pi^2(x):> = Re [ conj(u) n u - u a u ]; no additive background."""
    if table.scenario != "unruh":
        raise ValueError("table was not built for the unruh scenario")
    n = table.u.shape[1]
    nmat = moments.nmat[:n, :n]
    amat = moments.amat[:n, :n]
    u = table.u
    t_normal = np.einsum("xi,ij,xj->x", u.conj(), nmat, u)
    t_anom = np.einsum("xi,ij,xj->x", u, amat, u)
    vals = np.real(t_normal - t_anom)
    return DensityProfile(x=table.x, values=vals, mover=table.mover,
                          scenario="unruh", time=moments.time,
                          digit_audit=table.digits_surviving)


# ---------------------------------------------------------------------------
# Lorentz boost of a resting profile
# ---------------------------------------------------------------------------

def boost_resting_density(rest_profile: DensityProfile, acceleration: float,
                          x_grid=None, mover: str = "left") -> DensityProfile:
    """Boost a resting detector's density onto the accelerated worldline.

    Radiation that left the detector at proper time tau_e in [-T, 0] sits a
    distance y = |tau_e| from a resting detector at the end of the run, and
    arrives on the t = 0 hyperplane at x = e^{-a y}/a (left mover, Doppler
    boosted) or x = e^{+a y}/a (right mover, lowered):

        density_boosted(x) = density_rest(y = |ln(a x)| / a) / (a x)^2

    The rest profile may be either mover; it is read as a function of the
    distance traveled (its own mirror for the left mover).
    """
    if mover not in ("left", "right"):
        raise ValueError("mover must be 'left' or 'right'")
    a = float(acceleration)
    if a <= 0:
        raise ValueError("acceleration must be positive")
    order = np.argsort(rest_profile.x)
    xs = rest_profile.x[order]
    vs = rest_profile.values[order]
    if rest_profile.mover == "left":
        xs, vs = -xs[::-1], vs[::-1]
    elif rest_profile.mover != "right":
        raise ValueError("rest profile must be a single mover")
    # distance-traveled support
    ymin, ymax = xs[0], xs[-1]
    sgn = -1.0 if mover == "left" else 1.0
    if x_grid is None:
        ys = xs[(xs >= max(ymin, 0.0))]
        x_grid = np.exp(sgn * a * ys) / a
        x_grid = np.sort(x_grid)
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(x_grid <= 0):
        raise OutOfRange("boosted profile lives at x > 0")
    y = sgn * np.log(a * x_grid) / a
    if np.any(y < ymin - 1e-12) or np.any(y > ymax + 1e-12):
        raise OutOfRange("mapped coordinate leaves the rest profile's support")
    vals = np.interp(y, xs, vs) / (a * x_grid) ** 2
    return DensityProfile(x=x_grid, values=vals, mover=mover,
                          scenario="boosted-rest", time=rest_profile.time)


# ---------------------------------------------------------------------------
# source-term diagnostic
# ---------------------------------------------------------------------------

def source_term(profile_t: DensityProfile, profile_tminus: DensityProfile,
                eps: float) -> DensityProfile:
    """Light-ray finite difference s_eps(x, t) = D(x, t) - D(x -+ eps, t - eps).

    For the exact model the right/left-moving density is rigidly translated
    along light rays outside the emitter's support, so a nonzero value away
    from the detector signals numerical (truncation) error.
    """
    if profile_t.mover != profile_tminus.mover or profile_t.mover not in ("left", "right"):
        raise GridMismatch("source term needs two profiles of the same single mover")
    dt = profile_t.time - profile_tminus.time
    if abs(dt - eps) > 1e-9 * max(1.0, abs(eps)):
        raise GridMismatch(f"profiles are {dt} apart but eps = {eps}")
    shift = -eps if profile_t.mover == "right" else eps
    x = profile_t.x
    xs = x + shift
    order = np.argsort(profile_tminus.x)
    lo, hi = profile_tminus.x[order][0], profile_tminus.x[order][-1]
    inside = (xs >= lo) & (xs <= hi)
    if not np.any(inside):
        raise GridMismatch("shifted grid does not overlap the earlier profile")
    vals = profile_t.values[inside] - profile_tminus.interpolate(xs[inside])
    return DensityProfile(x=x[inside], values=vals, mover=profile_t.mover,
                          scenario=profile_t.scenario + "-source", time=profile_t.time)


def quiet_zone_statistic(source: DensityProfile, exclude_radius: float,
                         oscillatory: bool = False,
                         window: int = 11) -> float:
    """max |s_eps| over |x| > exclude_radius (0 if the zone is empty).

    ``oscillatory=True`` measures the truncation signature instead: the
    residual after removing a moving average over ``window`` grid points.
    Truncation error shows up as short-wavelength oscillations, whereas the
    exact model's own source tail (the Lorentzian coupling falls off only
    polynomially) is smooth and scales linearly with eps; near the zone
    boundary the smooth tail can dominate the raw maximum.
    """
    values = source.values
    if oscillatory:
        kernel = np.ones(window) / window
        values = values - np.convolve(values, kernel, mode="same")
    mask = np.abs(source.x) > exclude_radius
    if not np.any(mask):
        return 0.0
    return float(np.abs(values[mask]).max())


# ---------------------------------------------------------------------------
# profile CSV (shared schema for every scenario)
# ---------------------------------------------------------------------------

def write_profile_csv(profile: DensityProfile, path: str) -> None:
    audit = "" if profile.digit_audit is None else f"{profile.digit_audit:.17g}"
    with open(path, "w") as fh:
        fh.write("x,value,mover,scenario,t,digit_audit\n")
        for x, v in zip(profile.x, profile.values):
            fh.write(f"{x:.17g},{v:.17g},{profile.mover},{profile.scenario},"
                     f"{profile.time:.17g},{audit}\n")


def read_profile_csv(path: str) -> DensityProfile:
    xs, vs = [], []
    mover = scenario = ""
    t = 0.0
    audit = None
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("x,value"):
            raise ValueError(f"{path} is not a profile CSV")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            xs.append(float(parts[0]))
            vs.append(float(parts[1]))
            mover, scenario = parts[2], parts[3]
            t = float(parts[4])
            audit = float(parts[5]) if parts[5] else None
    return DensityProfile(x=np.array(xs), values=np.array(vs), mover=mover,
                          scenario=scenario, time=t, digit_audit=audit)
