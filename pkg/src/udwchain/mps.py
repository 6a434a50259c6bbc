"""TEBD time evolution of the two-level detector plus truncated chain.

The joint state lives on N+1 sites (site 0: detector, sites 1..N: bosons
with a common local-dimension cap) as a matrix-product state in canonical
Vidal form.  One time step is a second-order Trotter sweep

    U(dt) = U_even(dt/2) U_odd(dt) U_even(dt/2),

with bond gates exp(-i h_bond dt) from dense exponentials of the two-site
bond Hamiltonians; on-site terms are split half/half onto the adjacent
bonds (edge sites give their full share to their only bond).  Consecutive
steps between observable samples are merged so the half-gates fuse.

Every SVD renormalizes the state and logs the discarded weight; if chi_max
is what forced the truncation the run continues but is flagged with a
BondOverflowWarning.  The state truncation error is bounded by

    eps_t = |gamma_{N-1}| * integral_0^t sqrt(<c_{N-1}^dag c_{N-1}>) dt',

accumulated by the trapezoid rule from the sampled last-mode occupation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, svd

from .chain import (
    ChainCoefficients,
    ModelParams,
    free_excitation_amplitudes,
    vacuum_coefficients,
)
from .errors import BondOverflowWarning, WrongDetectorKind
from .observables import SecondMoments

__all__ = [
    "TEBDConfig",
    "MPSState",
    "GateSet",
    "initial_mps",
    "build_gates",
    "tebd_evolve",
    "measure_sigma_z",
    "occupation_tls",
    "detector_occupation",
    "site_numbers",
    "measure_correlators",
    "state_error_bound",
    "run_mps",
    "MPSRun",
    "dt_diagnostic",
    "DtDiagnosticReport",
]

_LAMBDA_FLOOR = 1e-100


@dataclass
class TEBDConfig:
    """Knobs of one TEBD run.

    Production time steps live in 1e-3 L .. 5e-3 L: larger steps accumulate
    Trotter error, while much smaller steps push the per-step state change
    below the SVD cutoff and the evolution silently stalls (see
    :func:`dt_diagnostic`).
    """

    dt: float = 1e-3
    chi_max: int = 300
    svd_cutoff: float = 1e-10
    boson_dim: int = 6
    sample_every: int = 10
    allow_ho: bool = False


@dataclass
class MPSState:
    gammas: list
    lambdas: list
    dims: list
    time: float = 0.0
    renorm_log: float = 0.0
    discarded_weight: float = 0.0
    max_chi: int = 1
    bond_overflow: bool = False

    @property
    def n_sites(self) -> int:
        return len(self.gammas)


def ladder(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim)), k=1)


def number_op(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float))


# TLS basis: index 0 = ground, 1 = excited, so sigma_z = diag(-1, +1)
SIGMA_Z = np.diag([-1.0, 1.0])
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def initial_mps(params: ModelParams, config: TEBDConfig,
                detector_state: str = "ground",
                chain_excitations: dict | None = None) -> MPSState:
    """Product state: detector in ground/excited, chain in given Fock levels."""
    n = params.n_modes
    d_det = 2 if params.detector == "tls" else config.boson_dim
    dims = [d_det] + [config.boson_dim] * n
    occ = dict(chain_excitations or {})
    gammas = []
    for site, d in enumerate(dims):
        g = np.zeros((1, d, 1), dtype=complex)
        if site == 0:
            level = 0 if detector_state == "ground" else 1
        else:
            level = occ.get(site - 1, 0)
        if level >= d:
            raise ValueError(f"site {site} occupation {level} exceeds local dim {d}")
        g[0, level, 0] = 1.0
        gammas.append(g)
    lambdas = [np.ones(1) for _ in range(len(dims) + 1)]
    return MPSState(gammas=gammas, lambdas=lambdas, dims=dims)


@dataclass
class GateSet:
    bonds: list                 # bond Hamiltonians, dense (d1*d2, d1*d2)
    dims: list
    dt: float
    u_half_even: dict = field(default_factory=dict)
    u_full: dict = field(default_factory=dict)

    def build(self):
        for b, h in enumerate(self.bonds):
            self.u_full[b] = expm(-1j * h * self.dt)
            if b % 2 == 0:
                self.u_half_even[b] = expm(-1j * h * self.dt / 2.0)


def build_gates(params: ModelParams, coeffs: ChainCoefficients,
                config: TEBDConfig) -> GateSet:
    """Bond Hamiltonians and their exponentials for the even-odd sweep."""
    if params.detector != "tls" and not config.allow_ho:
        raise WrongDetectorKind(
            "the MPS engine expects detector='tls'; pass allow_ho=True for "
            "harmonic-detector validation runs")
    n = coeffs.n_modes
    d_det = 2 if params.detector == "tls" else config.boson_dim
    d = config.boson_dim
    c = ladder(d)
    nboson = number_op(d)
    x_boson = c + c.T
    eye_d = np.eye(d)
    bonds = []
    # detector bond
    if params.detector == "tls":
        h_det = (params.omega_d / 2.0) * SIGMA_Z
        x_det = SIGMA_X
    else:
        a = ladder(d_det)
        h_det = params.omega_d * number_op(d_det)
        x_det = a + a.T
    w0 = 0.5 if n >= 2 else 1.0
    h01 = np.kron(h_det, eye_d) \
        + params.coupling * coeffs.kappa * np.kron(x_det, x_boson) \
        + w0 * coeffs.nu[0] * np.kron(np.eye(d_det), nboson)
    bonds.append(h01)
    hop = np.kron(c.T, c) + np.kron(c, c.T)
    for b in range(1, n):
        wl = 0.5
        wr = 0.5 if b < n - 1 else 1.0
        h = coeffs.gamma[b - 1] * hop \
            + wl * coeffs.nu[b - 1] * np.kron(nboson, eye_d) \
            + wr * coeffs.nu[b] * np.kron(eye_d, nboson)
        bonds.append(h)
    gates = GateSet(bonds=bonds, dims=[d_det] + [d] * n, dt=config.dt)
    gates.build()
    return gates


def _apply_gate(state: MPSState, b: int, u: np.ndarray, config: TEBDConfig) -> None:
    lam_l, lam_m, lam_r = state.lambdas[b], state.lambdas[b + 1], state.lambdas[b + 2]
    g1, g2 = state.gammas[b], state.gammas[b + 1]
    d1, d2 = state.dims[b], state.dims[b + 1]
    theta = lam_l[:, None, None] * g1 * lam_m[None, None, :]
    theta = np.tensordot(theta, g2 * lam_r[None, None, :], axes=(2, 0))
    chi_l, chi_r = theta.shape[0], theta.shape[3]
    theta = theta.reshape(chi_l, d1 * d2, chi_r)
    theta = np.tensordot(u, theta, axes=(1, 1)).transpose(1, 0, 2)
    mat = theta.reshape(chi_l, d1, d2, chi_r).reshape(chi_l * d1, d2 * chi_r)
    try:
        uu, s, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        uu, s, vh = svd(mat, full_matrices=False, lapack_driver="gesvd")
    w = s * s
    total = w.sum()
    if total <= 0:
        raise FloatingPointError("state collapsed to zero norm")
    # keep the largest k singular values with discarded weight <= cutoff
    rev = np.cumsum(w[::-1])[::-1]  # rev[k] = weight of s[k:]
    keep = int(np.searchsorted(-rev, -config.svd_cutoff * total))
    keep = max(1, min(keep, config.chi_max, len(s)))
    dropped = rev[keep] / total if keep < len(s) else 0.0
    if keep == config.chi_max and keep < len(s) and dropped > config.svd_cutoff:
        if not state.bond_overflow:
            warnings.warn(f"chi_max={config.chi_max} binds at bond {b} "
                          f"(t={state.time:.3f})", BondOverflowWarning)
        state.bond_overflow = True
    state.discarded_weight += float(dropped)
    s_kept = s[:keep]
    norm = math.sqrt(float(np.sum(s_kept * s_kept)))
    state.renorm_log += math.log(norm)
    lam_new = s_kept / norm
    inv_l = np.zeros_like(lam_l)
    np.divide(1.0, lam_l, out=inv_l, where=lam_l > _LAMBDA_FLOOR)
    inv_r = np.zeros_like(lam_r)
    np.divide(1.0, lam_r, out=inv_r, where=lam_r > _LAMBDA_FLOOR)
    state.gammas[b] = (uu[:, :keep].reshape(chi_l, d1, keep)
                       * inv_l[:, None, None])
    state.gammas[b + 1] = (vh[:keep].reshape(keep, d2, chi_r)
                           * inv_r[None, None, :])
    state.lambdas[b + 1] = lam_new
    state.max_chi = max(state.max_chi, keep)


def _sweep(state, gates, config, which: str, half: bool) -> None:
    start = 0 if which == "even" else 1
    for b in range(start, state.n_sites - 1, 2):
        u = gates.u_half_even[b] if half else gates.u_full[b]
        _apply_gate(state, b, u, config)


def _evolve_block(state: MPSState, gates: GateSet, config: TEBDConfig,
                  n_steps: int) -> None:
    """n_steps second-order Trotter steps with fused even half-gates."""
    if n_steps <= 0:
        return
    _sweep(state, gates, config, "even", half=True)
    _sweep(state, gates, config, "odd", half=False)
    for _ in range(n_steps - 1):
        _sweep(state, gates, config, "even", half=False)
        _sweep(state, gates, config, "odd", half=False)
    _sweep(state, gates, config, "even", half=True)
    state.time += n_steps * config.dt


def tebd_evolve(state: MPSState, gates: GateSet, t_total: float,
                config: TEBDConfig, observer=None) -> MPSState:
    """Evolve for t_total, calling observer(state) at every sample point."""
    n_steps = int(round(t_total / config.dt))
    if abs(n_steps * config.dt - t_total) > 1e-9 * max(1.0, abs(t_total)):
        raise ValueError("t_total must be a multiple of dt")
    if observer is not None:
        observer(state)
    done = 0
    while done < n_steps:
        block = min(config.sample_every, n_steps - done)
        _evolve_block(state, gates, config, block)
        done += block
        if observer is not None:
            observer(state)
    return state


# ---------------------------------------------------------------------------
# measurements
# ---------------------------------------------------------------------------

def site_expectation(state: MPSState, site: int, op: np.ndarray) -> complex:
    g = state.gammas[site]
    th = state.lambdas[site][:, None, None] * g * state.lambdas[site + 1][None, None, :]
    return complex(np.einsum("asb,st,atb->", th.conj(), op, th))


def measure_sigma_z(state: MPSState) -> float:
    return float(np.real(site_expectation(state, 0, SIGMA_Z)))


def occupation_tls(state: MPSState) -> float:
    return (measure_sigma_z(state) + 1.0) / 2.0


def detector_occupation(state: MPSState) -> float:
    """<n> of the detector site for either detector kind."""
    if state.dims[0] == 2:
        return occupation_tls(state)
    return float(np.real(site_expectation(state, 0, number_op(state.dims[0]))))


def site_numbers(state: MPSState) -> np.ndarray:
    """Occupation of every chain site (detector excluded)."""
    return np.array([
        np.real(site_expectation(state, i, number_op(state.dims[i])))
        for i in range(1, state.n_sites)])


def _b_tensors(state: MPSState, site: int) -> np.ndarray:
    return state.gammas[site] * state.lambdas[site + 1][None, None, :]


def _one_site(state, site, op):
    return site_expectation(state, site, op)


def _two_site(state: MPSState, i: int, j: int, op_i: np.ndarray, op_j: np.ndarray,
              env_cache: dict) -> complex:
    """<O_i P_j> for chain sites i < j using cached left transfer environments."""
    key = (i, j)
    bi = _b_tensors(state, i)
    if (i, j - 1) in env_cache:
        env = env_cache[(i, j - 1)]
        bk = _b_tensors(state, j - 1)
        env = np.einsum("asb,ac,csd->bd", bk.conj(), env, bk, optimize=True)
    else:
        left = np.diag(state.lambdas[i] ** 2).astype(complex)
        env = np.einsum("asb,st,ac,ctd->bd", bi.conj(), op_i, left, bi, optimize=True)
        for k in range(i + 1, j):
            bk = _b_tensors(state, k)
            env = np.einsum("asb,ac,csd->bd", bk.conj(), env, bk, optimize=True)
    env_cache[key] = env
    bj = _b_tensors(state, j)
    return complex(np.einsum("asb,st,ac,ctb->", bj.conj(), op_j, env, bj, optimize=True))


def measure_correlators(state: MPSState) -> SecondMoments:
    """Full <c_i^dag c_j> and <c_i c_j> matrices over the chain sites.

    Transfer contractions reuse the partially built environments, so the
    whole N x N pair set costs O(N^2) site contractions.
    """
    n = state.n_sites - 1
    d = state.dims[1]
    c = ladder(d).astype(complex)
    cdag = c.conj().T
    nop = number_op(d).astype(complex)
    nmat = np.zeros((n, n), dtype=complex)
    amat = np.zeros((n, n), dtype=complex)
    for i in range(n):
        site = i + 1
        nmat[i, i] = _one_site(state, site, nop)
        amat[i, i] = _one_site(state, site, c @ c)
    cache_n: dict = {}
    cache_a: dict = {}
    for i in range(n):
        for j in range(i + 1, n):
            nmat[i, j] = _two_site(state, i + 1, j + 1, cdag, c, cache_n)
            amat[i, j] = _two_site(state, i + 1, j + 1, c, c, cache_a)
            nmat[j, i] = np.conj(nmat[i, j])
            amat[j, i] = amat[i, j]
        cache_n.clear()
        cache_a.clear()
    return SecondMoments(nmat=nmat, amat=amat, time=state.time,
                         provenance={"engine": "mps", "max_chi": state.max_chi})


def state_error_bound(times, n_last, gamma_trunc: float) -> np.ndarray:
    """eps_t = |gamma_{N-1}| integral_0^t sqrt(<n_{N-1}>) dt' (trapezoid)."""
    times = np.asarray(times, dtype=float)
    root = np.sqrt(np.maximum(np.asarray(n_last, dtype=float), 0.0))
    out = np.zeros_like(root)
    if len(times) > 1:
        out[1:] = np.cumsum(0.5 * (root[1:] + root[:-1]) * np.diff(times))
    return abs(gamma_trunc) * out


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------

@dataclass
class MPSRun:
    times: np.ndarray
    occupation: np.ndarray
    n_last: np.ndarray
    bound: np.ndarray
    snapshots: list
    site_number_samples: dict
    mode_samples: dict
    state: MPSState
    config: TEBDConfig


def run_mps(params: ModelParams, coeffs: ChainCoefficients, config: TEBDConfig,
            initial: str, t_max: float, snapshot_times=(),
            site_number_times=(), chain_excitations=None,
            mode_sample_indices=None) -> MPSRun:
    """Evolve and sample; snapshots collect full correlator matrices.

    Snapshot and site-number times must lie on the sampling grid
    dt * sample_every.
    """
    gates = build_gates(params, coeffs, config)
    state = initial_mps(params, config, initial, chain_excitations)
    if mode_sample_indices is None:
        mode_sample_indices = sorted({0, coeffs.n_modes // 2, coeffs.n_modes - 1})
    times, occ, n_last = [], [], []
    snapshots = []
    site_samples = {}
    mode_samples = {i: [] for i in mode_sample_indices}
    n_site = state.n_sites
    nop = number_op(config.boson_dim)
    snap_set = {round(float(t), 9) for t in snapshot_times}
    site_set = {round(float(t), 9) for t in site_number_times}

    def observer(st: MPSState):
        times.append(st.time)
        occ.append(detector_occupation(st))
        n_last.append(float(np.real(site_expectation(st, n_site - 1, nop))))
        for i in mode_sample_indices:
            mode_samples[i].append(float(np.real(site_expectation(st, i + 1, nop))))
        tkey = round(st.time, 9)
        if tkey in site_set:
            site_samples[tkey] = site_numbers(st)
        if tkey in snap_set:
            snapshots.append((st.time, measure_correlators(st)))

    tebd_evolve(state, gates, t_max, config, observer)
    times_arr = np.array(times)
    return MPSRun(times=times_arr, occupation=np.array(occ),
                  n_last=np.array(n_last),
                  bound=state_error_bound(times_arr, np.array(n_last),
                                          coeffs.gamma_trunc),
                  snapshots=snapshots, site_number_samples=site_samples,
                  mode_samples={i: np.array(v) for i, v in mode_samples.items()},
                  state=state, config=config)


# ---------------------------------------------------------------------------
# time-step diagnostic
# ---------------------------------------------------------------------------

@dataclass
class DtDiagnosticReport:
    """Deviation of the free single-excitation benchmark per (dt, t).

    entries[dt][t] = max_j |<n_j(t)> - |rho_j(t)|^2|.  A dt whose deviation
    exceeds 10x the best dt at a common measurement time is flagged; the
    too-small-dt failure mode (evolution stalls below the SVD cutoff) shows
    up this way already at the earliest time.
    """

    entries: dict
    flagged: list
    times: tuple


def dt_diagnostic(params: ModelParams, dt_list, chi: int,
                  times=(1.0, 3.95, 7.0), boson_dim: int = 2,
                  max_steps: int = 150_000,
                  svd_cutoff: float = 1e-10) -> DtDiagnosticReport:
    """Run the lambda=0 single-excitation benchmark for each candidate dt."""
    free = ModelParams(length=params.length, coupling=0.0, omega_d=params.omega_d,
                       detector="tls", bath="vacuum", n_modes=params.n_modes)
    coeffs_free = vacuum_coefficients(free.length, free.n_modes)
    entries: dict = {}
    for dt in dt_list:
        reachable = [t for t in times if int(round(t / dt)) <= max_steps]
        if not reachable:
            entries[dt] = {}
            continue
        cfg = TEBDConfig(dt=dt, chi_max=chi, svd_cutoff=svd_cutoff,
                         boson_dim=boson_dim, sample_every=1)
        run_times = sorted(reachable)
        state = initial_mps(free, cfg, "ground", chain_excitations={0: 1})
        gates = build_gates(free, coeffs_free, cfg)
        per_t = {}
        t_prev = 0.0
        for t in run_times:
            n_steps = int(round((t - t_prev) / dt))
            _evolve_block(state, gates, cfg, n_steps)
            t_prev = state.time
            numbers = site_numbers(state)
            exact = np.abs(free_excitation_amplitudes(state.time, free.length,
                                                      free.n_modes)) ** 2
            per_t[t] = float(np.abs(numbers - exact).max())
        entries[dt] = per_t
    flagged = []
    for t in times:
        have = {dt: vals[t] for dt, vals in entries.items() if t in vals}
        if len(have) < 2:
            continue
        best = min(have.values())
        for dt, dev in have.items():
            if dev > 10.0 * best and dt not in flagged:
                flagged.append(dt)
    return DtDiagnosticReport(entries=entries, flagged=flagged, times=tuple(times))
