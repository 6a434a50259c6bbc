"""End-to-end scenario runs: config files, output files, manifests.

A scenario couples one :class:`~udwchain.chain.ModelParams` to an engine
(covariance propagation for the harmonic detector, TEBD for the two-level
one), evolves it, and writes

* ``trajectory.csv``   -- (t, <n>, selected <c_i^dag c_i>, bound),
* ``snapshot_t*.txt``  -- the full second-moment matrices at requested times,
* ``manifest.json``    -- config hash, code version, cache keys, wall clock,
                          digit audits and the list of every produced file.

Identical configs reproduce byte-identical CSVs: all floats are serialized
with explicit 17-significant-digit formatting and reductions run in fixed
order.  Config files are INI-style key/value text; ``config_schema()``
documents every field.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ._version import __version__
from .chain import ModelParams, chain_coefficients
from .errors import ConfigError
from .gaussian import run_gaussian, second_moments
from .highprec import PrecisionConfig
from .mps import TEBDConfig, run_mps
from .observables import (
    SecondMoments,
    default_rest_grid,
    default_unruh_grid,
    thermal_density,
    thermal_reconstruction_table,
    unruh_density,
    unruh_reconstruction_table,
    vacuum_density,
)

__all__ = [
    "GridSpec",
    "ScenarioConfig",
    "RunManifest",
    "load_config",
    "config_schema",
    "config_hash",
    "run_scenario",
    "write_snapshot",
    "read_snapshot",
    "density_from_snapshot",
    "cache_directory",
]


def cache_directory(explicit: str | None = None) -> str:
    if explicit:
        return os.path.expanduser(explicit)
    env = os.environ.get("UDWCHAIN_CACHE")
    if env:
        return os.path.expanduser(env)
    return os.path.expanduser("~/.cache/udwchain")


@dataclass(frozen=True)
class GridSpec:
    kind: str = "uniform"   # 'uniform' | 'log'
    lo: float = -12.0
    hi: float = 12.0
    count: int = 481

    def build(self) -> np.ndarray:
        if self.kind == "uniform":
            return np.linspace(self.lo, self.hi, self.count)
        if self.kind == "log":
            if self.lo <= 0:
                raise ConfigError("grid.lo must be positive for a log grid")
            return np.geomspace(self.lo, self.hi, self.count)
        raise ConfigError(f"grid.kind {self.kind!r} not one of uniform|log")


def default_grid_for(params: ModelParams) -> GridSpec:
    if params.bath == "unruh":
        g = default_unruh_grid(params.length)
        return GridSpec("log", float(g[0]), float(g[-1]), len(g))
    g = default_rest_grid(params.length)
    return GridSpec("uniform", float(g[0]), float(g[-1]), len(g))


@dataclass
class ScenarioConfig:
    params: ModelParams
    engine: str = "gaussian"
    initial: str = "ground"
    t_max: float = 7.0
    snapshot_times: tuple = ()
    sample_dt: float | None = None
    tebd: TEBDConfig = field(default_factory=TEBDConfig)
    grid: GridSpec | None = None
    digits: int = 300
    cache_dir: str | None = None
    output_dir: str = "runs/out"
    allow_ho_mps: bool = False
    label: str = "run"

    def validate(self):
        if self.engine not in ("gaussian", "mps"):
            raise ConfigError("run.engine must be 'gaussian' or 'mps'")
        if self.initial not in ("ground", "excited"):
            raise ConfigError("run.initial must be 'ground' or 'excited'")
        if self.engine == "gaussian" and self.params.detector != "ho":
            raise ConfigError("run.engine=gaussian requires model.detector=ho")
        if self.engine == "mps" and self.params.detector != "tls" and not self.allow_ho_mps:
            raise ConfigError("run.engine=mps requires model.detector=tls "
                              "(set run.allow_ho_mps=true for validation runs)")
        if self.t_max <= 0:
            raise ConfigError("run.t_max must be positive")
        for t in self.snapshot_times:
            if t < 0 or t > self.t_max + 1e-12:
                raise ConfigError(f"snapshot time {t} outside [0, t_max]")


_SCHEMA = """\
udwchain scenario configuration (INI key/value text)

[model]
length       = 1.0      detector width L; the unit of length (positive)
coupling     = 2.0      dimensionless coupling strength (>= 0)
omega_d      = 1.2566   detector gap; defaults to 2*pi/(5*length)
detector     = ho       ho | tls
bath         = vacuum   vacuum | thermal | unruh
beta         = 6.2832   inverse temperature (thermal bath only, > 0)
acceleration = 0.1      proper acceleration (unruh bath only, > 0);
                        internally identical to thermal with beta = 2*pi/a
n_modes      = 250      chain length N (>= 2)

[run]
engine         = gaussian   gaussian (detector=ho) | mps (detector=tls)
initial        = ground     ground | excited
t_max          = 7.0        evolution span in units of L
snapshot_times = 1.0, 4.0, 7.0   comma list; full moments dumped there
sample_dt      = 0.01       observable/bound sampling interval
allow_ho_mps   = false      explicit override: harmonic detector via MPS
label          = run        name prefix for output files

[tebd]                      (mps engine only)
dt         = 0.001          Trotter step, sane range 1e-3..5e-3 in units L
chi_max    = 300            bond-dimension cap
svd_cutoff = 1e-10          discarded-weight threshold
boson_dim  = 6              local boson dimension

[grid]
kind  = uniform             uniform | log (default: uniform [-12L,12L] x481,
lo    = -12.0                log [1e-2 L, 1e2 L] x400 for unruh)
hi    = 12.0
count = 481

[precision]
digits = 300                decimal digits for thermal coefficient pipeline

[output]
output_dir = runs/out
cache_dir  =                coefficient cache (default $UDWCHAIN_CACHE or
                            ~/.cache/udwchain)
"""


def config_schema() -> str:
    return _SCHEMA


def _getfloat(sec, key, default=None):
    if key in sec and sec[key] != "":
        return float(sec[key])
    return default


def load_config(path: str, overrides: dict | None = None) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path) as fh:
        cp.read_file(fh)
    model = cp["model"] if cp.has_section("model") else {}
    run = cp["run"] if cp.has_section("run") else {}
    tebd = cp["tebd"] if cp.has_section("tebd") else {}
    grid = cp["grid"] if cp.has_section("grid") else None
    precision = cp["precision"] if cp.has_section("precision") else {}
    output = cp["output"] if cp.has_section("output") else {}
    try:
        length = _getfloat(model, "length", 1.0)
        params = ModelParams(
            length=length,
            coupling=_getfloat(model, "coupling", 2.0),
            omega_d=_getfloat(model, "omega_d", 2 * math.pi / (5 * length)),
            detector=model.get("detector", "ho"),
            bath=model.get("bath", "vacuum"),
            beta=_getfloat(model, "beta"),
            acceleration=_getfloat(model, "acceleration"),
            n_modes=int(model.get("n_modes", 250)),
        )
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from exc
    snap_raw = run.get("snapshot_times", "")
    snaps = tuple(float(s) for s in snap_raw.replace(",", " ").split()) if snap_raw else ()
    cfg = ScenarioConfig(
        params=params,
        engine=run.get("engine", "gaussian"),
        initial=run.get("initial", "ground"),
        t_max=_getfloat(run, "t_max", 7.0),
        snapshot_times=snaps,
        sample_dt=_getfloat(run, "sample_dt"),
        tebd=TEBDConfig(
            dt=_getfloat(tebd, "dt", 1e-3),
            chi_max=int(tebd.get("chi_max", 300)),
            svd_cutoff=_getfloat(tebd, "svd_cutoff", 1e-10),
            boson_dim=int(tebd.get("boson_dim", 6)),
        ),
        grid=GridSpec(grid.get("kind", "uniform"), _getfloat(grid, "lo", -12.0),
                      _getfloat(grid, "hi", 12.0), int(grid.get("count", 481)))
        if grid is not None else None,
        digits=int(precision.get("digits", 300)),
        cache_dir=output.get("cache_dir") or None,
        output_dir=output.get("output_dir", "runs/out"),
        allow_ho_mps=run.get("allow_ho_mps", "false").lower() in ("1", "true", "yes"),
        label=run.get("label", "run"),
    )
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg = replace(cfg, **{key: val})
    cfg.validate()
    return cfg


def _config_dict(cfg: ScenarioConfig) -> dict:
    return {
        "model": {
            "length": cfg.params.length, "coupling": cfg.params.coupling,
            "omega_d": cfg.params.omega_d, "detector": cfg.params.detector,
            "bath": cfg.params.bath, "beta": cfg.params.beta,
            "acceleration": cfg.params.acceleration, "n_modes": cfg.params.n_modes,
        },
        "run": {
            "engine": cfg.engine, "initial": cfg.initial, "t_max": cfg.t_max,
            "snapshot_times": list(cfg.snapshot_times), "sample_dt": cfg.sample_dt,
            "allow_ho_mps": cfg.allow_ho_mps, "label": cfg.label,
        },
        "tebd": {
            "dt": cfg.tebd.dt, "chi_max": cfg.tebd.chi_max,
            "svd_cutoff": cfg.tebd.svd_cutoff, "boson_dim": cfg.tebd.boson_dim,
        },
        "grid": None if cfg.grid is None else
        {"kind": cfg.grid.kind, "lo": cfg.grid.lo, "hi": cfg.grid.hi,
         "count": cfg.grid.count},
        "precision": {"digits": cfg.digits},
        "version": __version__,
    }


def config_hash(cfg: ScenarioConfig) -> str:
    blob = json.dumps(_config_dict(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# snapshot files (moments + enough header to rebuild reconstructions)
# ---------------------------------------------------------------------------

def write_snapshot(moments: SecondMoments, cfg: ScenarioConfig, path: str) -> None:
    p = cfg.params
    n = moments.n_modes
    lines = [
        "# udwchain moments snapshot",
        f"version: {__version__}",
        f"engine: {cfg.engine}",
        f"detector: {p.detector}",
        f"bath: {p.bath}",
        f"length: {p.length:.17g}",
        f"coupling: {p.coupling:.17g}",
        f"omega_d: {p.omega_d:.17g}",
        f"beta: {'' if p.beta is None else format(p.beta, '.17g')}",
        f"acceleration: {'' if p.acceleration is None else format(p.acceleration, '.17g')}",
        f"n_modes: {n}",
        f"initial: {cfg.initial}",
        f"digits: {cfg.digits}",
        f"t: {moments.time:.17g}",
    ]
    for name, mat in (("nmat", moments.nmat), ("amat", moments.amat)):
        for part, fn in (("real", np.real), ("imag", np.imag)):
            lines.append(f"matrix {name} {part}")
            arr = fn(mat)
            for row in arr:
                lines.append(" ".join(f"{v:.17g}" for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path: str) -> tuple[SecondMoments, dict]:
    header: dict = {}
    blocks: dict = {}
    current = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            if line.startswith("matrix "):
                _, name, part = line.split()
                current = (name, part)
                blocks[current] = []
            elif current is not None:
                blocks[current].append([float(v) for v in line.split()])
            else:
                key, _, val = line.partition(":")
                header[key.strip()] = val.strip()
    nmat = np.array(blocks[("nmat", "real")]) + 1j * np.array(blocks[("nmat", "imag")])
    amat = np.array(blocks[("amat", "real")]) + 1j * np.array(blocks[("amat", "imag")])
    moments = SecondMoments(nmat=nmat, amat=amat, time=float(header["t"]),
                            provenance={"engine": header.get("engine", "")})
    return moments, header


def params_from_snapshot_header(header: dict) -> ModelParams:
    return ModelParams(
        length=float(header["length"]),
        coupling=float(header["coupling"]),
        omega_d=float(header["omega_d"]),
        detector=header["detector"],
        bath=header["bath"],
        beta=float(header["beta"]) if header.get("beta") else None,
        acceleration=float(header["acceleration"]) if header.get("acceleration") else None,
        n_modes=int(header["n_modes"]),
    )


# ---------------------------------------------------------------------------
# running and reporting
# ---------------------------------------------------------------------------

@dataclass
class RunManifest:
    config_hash: str
    version: str
    label: str
    cache_keys: list
    wall_clock_s: float
    files: list
    digit_audits: dict
    error_bound: dict

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=1)


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_trajectory_csv(path, times, occupation, n_last, bound, mode_samples):
    mode_idx = sorted(mode_samples)
    with open(path, "w") as fh:
        cols = ["t", "occupation"] + [f"n{i}" for i in mode_idx] + ["n_last", "bound"]
        fh.write(",".join(cols) + "\n")
        for k in range(len(times)):
            row = [f"{times[k]:.17g}", f"{occupation[k]:.17g}"]
            row += [f"{mode_samples[i][k]:.17g}" for i in mode_idx]
            row += [f"{n_last[k]:.17g}", f"{bound[k]:.17g}"]
            fh.write(",".join(row) + "\n")


def run_scenario(cfg: ScenarioConfig) -> RunManifest:
    """Evolve one configured scenario and write its output files."""
    cfg.validate()
    t0 = time.time()
    os.makedirs(cfg.output_dir, exist_ok=True)
    cache = cache_directory(cfg.cache_dir)
    prec = PrecisionConfig(cfg.digits)
    coeffs = chain_coefficients(cfg.params, prec, cache)
    cache_keys = [coeffs.provenance["cache_key"]] if "cache_key" in coeffs.provenance else []
    files = []
    initial_occ = 0 if cfg.initial == "ground" else 1

    if cfg.engine == "gaussian":
        run = run_gaussian(cfg.params, coeffs, initial_occ, cfg.t_max,
                           sample_dt=cfg.sample_dt,
                           snapshot_times=cfg.snapshot_times)
        snapshots = [(t, second_moments(state)) for t, state in run.snapshots]
        mode_samples = run.mode_samples
        bound = run.bound
        times, occupation, n_last = run.times, run.occupation, run.n_last
    else:
        sample_every = max(1, int(round((cfg.sample_dt or 10 * cfg.tebd.dt)
                                        / cfg.tebd.dt)))
        tebd = replace(cfg.tebd, sample_every=sample_every,
                       allow_ho=cfg.allow_ho_mps)
        run = run_mps(cfg.params, coeffs, tebd, cfg.initial, cfg.t_max,
                      snapshot_times=cfg.snapshot_times)
        snapshots = run.snapshots
        mode_samples = run.mode_samples
        bound = run.bound
        times, occupation, n_last = run.times, run.occupation, run.n_last

    traj_path = os.path.join(cfg.output_dir, f"{cfg.label}_trajectory.csv")
    _write_trajectory_csv(traj_path, times, occupation, n_last, bound, mode_samples)
    files.append(traj_path)
    for t, moments in snapshots:
        snap_path = os.path.join(cfg.output_dir, f"{cfg.label}_snapshot_t{t:g}.txt")
        write_snapshot(moments, cfg, snap_path)
        files.append(snap_path)

    manifest = RunManifest(
        config_hash=config_hash(cfg),
        version=__version__,
        label=cfg.label,
        cache_keys=cache_keys,
        wall_clock_s=round(time.time() - t0, 3),
        files=[{"name": os.path.basename(f), "sha256": _sha256(f)} for f in files]
        + [{"name": f"{cfg.label}_manifest.json", "sha256": None}],
        digit_audits={},
        error_bound={"final": float(bound[-1]), "max": float(bound.max())},
    )
    with open(os.path.join(cfg.output_dir, f"{cfg.label}_manifest.json"), "w") as fh:
        fh.write(manifest.to_json() + "\n")
    return manifest


def density_from_snapshot(snapshot_path: str, x_grid=None, mover: str = "right",
                          digits: int | None = None, cache_dir: str | None = None,
                          raw_constant: bool = False):
    """Reconstruct a density profile from a snapshot file.

    The bath named in the snapshot header picks the reconstruction route;
    thermal/unruh routes regenerate (or load from cache) the polynomial
    matrix at the snapshot's recorded precision.
    """
    moments, header = read_snapshot(snapshot_path)
    params = params_from_snapshot_header(header)
    digits = digits or int(header.get("digits", 300))
    if x_grid is None:
        x_grid = (default_unruh_grid(params.length) if params.bath == "unruh"
                  else default_rest_grid(params.length))
    if params.bath == "vacuum":
        return vacuum_density(moments, x_grid, params.length, mover=mover)
    coeffs = chain_coefficients(params, PrecisionConfig(digits),
                                cache_directory(cache_dir))
    if params.bath == "thermal":
        table = thermal_reconstruction_table(
            coeffs.poly, params.effective_beta(), params.length, x_grid,
            n_modes=params.n_modes, mover=mover, precision=digits)
        return thermal_density(moments, table, raw_constant=raw_constant)
    table = unruh_reconstruction_table(
        coeffs.poly, params.acceleration, params.length, x_grid,
        n_modes=params.n_modes, mover=mover, precision=digits)
    return unruh_density(moments, table)
