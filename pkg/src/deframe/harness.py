"""Experiment manifests and the degrade / deblur / sweep / metrics pipeline.

A manifest is a TOML file::

    input_image = "images/checker64.png"   # relative to the manifest
    outputs = "out/smoke"
    resize = [64, 64]                      # optional

    [degradation]
    psf = "gaussian"        # or "motion" (length, angle) or "identity"
    size = [9, 9]
    sigma = 1.5
    std = 0.001
    noise_dbm = -40         # omit to disable noise
    seed = 42

    [solver]                # any SolverConfig field; a list makes a sweep axis
    lambda3 = [1e3, 1e5]

    [sweep]
    max_runs = 500

    [emit]
    restored_png = true
    curves_csv = true
    report_csv = true
    truth_dump = true

All CSV output is UTF-8 with a header row and six-decimal fixed floats.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .degrade import DegradationSpec, degrade
from .errors import ConfigError, ImageIOError
from .io import atomic_write_text, load_image, read_sidecar, save_image, write_sidecar
from .metrics import PSNR_CAP, QualityReport, quality_report
from .solver import SolverConfig, solve

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

DEFAULT_MAX_RUNS = 500
SOLVER_FIELDS = tuple(f.name for f in fields(SolverConfig))
EMIT_FLAGS = ("restored_png", "curves_csv", "report_csv", "truth_dump")


@dataclass
class Manifest:
    source: Path
    digest: str
    input_image: Path
    outputs: Path
    degradation: DegradationSpec
    solver_grid: dict
    resize: tuple | None = None
    max_runs: int = DEFAULT_MAX_RUNS
    emit: dict = field(default_factory=lambda: dict.fromkeys(EMIT_FLAGS, True))

    def configs(self):
        """Every solver configuration in the Cartesian grid, in manifest order."""
        keys = list(self.solver_grid)
        axes = [self.solver_grid[k] for k in keys]
        for combo in itertools.product(*axes):
            yield SolverConfig(**dict(zip(keys, combo)))

    @property
    def n_configs(self):
        return int(np.prod([len(v) for v in self.solver_grid.values()], dtype=np.int64))

    def single_config(self):
        if self.n_configs != 1:
            raise ConfigError(f"manifest defines a grid of {self.n_configs} configs; use sweep")
        return next(self.configs())


def _parse_degradation(d):
    d = dict(d)
    kind = d.pop("psf", "gaussian")
    params = {}
    for key in ("size", "sigma", "length", "angle"):
        if key in d:
            params[key] = d.pop(key)
    if "size" in params:
        params["size"] = tuple(int(v) for v in params["size"])
    std = float(d.pop("std", 0.0))
    noise = d.pop("noise_dbm", None)
    seed = int(d.pop("seed", 0))
    if d:
        raise ConfigError(f"unknown degradation keys: {sorted(d)}")
    if kind not in ("gaussian", "motion", "identity"):
        raise ConfigError(f"unknown psf kind {kind!r}")
    try:
        return DegradationSpec(kind, params, std, None if noise is None else float(noise), seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_solver(d):
    grid = {}
    for key, val in d.items():
        if key not in SOLVER_FIELDS:
            raise ConfigError(f"unknown solver key {key!r}")
        vals = list(val) if isinstance(val, list) else [val]
        if not vals:
            raise ConfigError(f"solver grid axis {key!r} is empty")
        grid[key] = vals
    return grid


def load_manifest(path, seed=None, out=None) -> Manifest:
    """Parse a manifest file; ``seed`` and ``out`` override the file's values."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ImageIOError(f"{path}: cannot read manifest ({exc})") from exc
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from exc

    base = path.parent
    known = {"input_image", "outputs", "resize", "degradation", "solver", "sweep", "emit"}
    extra = set(doc) - known
    if extra:
        raise ConfigError(f"unknown manifest keys: {sorted(extra)}")
    if "input_image" not in doc:
        raise ConfigError("manifest needs input_image")

    degradation = _parse_degradation(doc.get("degradation", {}))
    if seed is not None:
        degradation = replace(degradation, seed=int(seed))
    outputs = Path(out) if out is not None else base / doc.get("outputs", "out")
    emit = dict.fromkeys(EMIT_FLAGS, True)
    for k, v in doc.get("emit", {}).items():
        if k not in EMIT_FLAGS:
            raise ConfigError(f"unknown emit flag {k!r}")
        emit[k] = bool(v)
    resize = doc.get("resize")
    digest = hashlib.sha256(raw + f"|seed={degradation.seed}".encode()).hexdigest()
    m = Manifest(
        source=path,
        digest=digest,
        input_image=base / doc["input_image"],
        outputs=outputs,
        degradation=degradation,
        solver_grid=_parse_solver(doc.get("solver", {})),
        resize=tuple(resize) if resize else None,
        max_runs=int(doc.get("sweep", {}).get("max_runs", DEFAULT_MAX_RUNS)),
        emit=emit,
    )
    # validate every grid value eagerly so config errors surface before any work
    for key, vals in m.solver_grid.items():
        for v in vals:
            SolverConfig(**{key: v})
    return m


def _reference(manifest):
    if not manifest.input_image.exists():
        raise ImageIOError(f"{manifest.input_image}: input image not found")
    return load_image(manifest.input_image, size=manifest.resize)


def _ensure_outputs(manifest):
    try:
        manifest.outputs.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ImageIOError(f"{manifest.outputs}: cannot create output directory ({exc})") from exc
    if not os.access(manifest.outputs, os.W_OK):
        raise ImageIOError(f"{manifest.outputs}: output directory is not writable")


def _report_csv(rows):
    lines = ["image," + QualityReport.HEADER]
    lines += [f"{label},{rep.csv_row()}" for label, rep in rows]
    return "\n".join(lines) + "\n"


def cmd_degrade(manifest: Manifest) -> dict:
    """Write ``y.png``/``y.f64``, the observed kernel ``k0.f64`` and the truth dump."""
    clean = _reference(manifest)
    _ensure_outputs(manifest)
    y, k0, truth = degrade(clean, manifest.degradation)
    out = manifest.outputs
    paths = {"y_png": out / "y.png", "y": out / "y.f64", "k0": out / "k0.f64"}
    save_image(y, paths["y_png"], bits=16)
    write_sidecar(paths["y"], y)
    write_sidecar(paths["k0"], k0)
    if manifest.emit["truth_dump"]:
        for name, arr in (("k_true", truth.kernel), ("e_true", truth.error),
                          ("noise", truth.noise), ("clean", clean)):
            paths[name] = out / f"{name}.f64"
            write_sidecar(paths[name], arr)
    return paths


def _load_observation(manifest):
    out = manifest.outputs
    for name in ("y.f64", "k0.f64"):
        if not (out / name).exists():
            raise ImageIOError(f"{out / name}: missing; run 'deframe degrade' first")
    return read_sidecar(out / "y.f64"), read_sidecar(out / "k0.f64")


def _run_one(y, k0, config, reference):
    t0 = time.perf_counter()
    res = solve(y, k0, config, reference=reference)
    rep = quality_report(res.x, reference) if reference is not None else None
    return res, rep, time.perf_counter() - t0


def cmd_deblur(manifest: Manifest) -> dict:
    """Restore ``y`` and write ``x.png``, ``x.f64``, ``curves.csv`` and ``report.csv``."""
    config = manifest.single_config()
    y, k0 = _load_observation(manifest)
    reference = _reference(manifest)
    if reference.shape != y.shape:
        raise ConfigError(f"reference {reference.shape} does not match y {y.shape}")
    _ensure_outputs(manifest)
    res, rep, _ = _run_one(y, k0, config, reference)
    out = manifest.outputs
    paths = {"x": out / "x.f64"}
    write_sidecar(paths["x"], res.x)
    if manifest.emit["restored_png"]:
        paths["x_png"] = out / "x.png"
        save_image(res.x, paths["x_png"], bits=16)
    if manifest.emit["curves_csv"]:
        paths["curves"] = out / "curves.csv"
        atomic_write_text(paths["curves"], res.history.to_csv())
    if manifest.emit["report_csv"]:
        paths["report"] = out / "report.csv"
        degraded = quality_report(np.clip(y, 0.0, 1.0), reference)
        atomic_write_text(paths["report"], _report_csv([("degraded", degraded), ("restored", rep)]))
    for msg in res.history.warnings:
        log.info("%s", msg)
    return paths


def config_hash(config: SolverConfig) -> str:
    blob = json.dumps(config.as_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class RunRecord:
    config: SolverConfig
    config_hash: str
    seed: int
    report: QualityReport
    outer_iters: int
    wall_time: float


def _sweep_worker(args):
    y, k0, config, reference, run_dir, emit_curves = args
    res, rep, wall = _run_one(y, k0, config, reference)
    run_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(run_dir / "report.csv", _report_csv([("restored", rep)]))
    if emit_curves:
        atomic_write_text(run_dir / "curves.csv", res.history.to_csv())
    return rep, len(res.history), wall


def resolve_threads(threads=None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("DEFRAME_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"DEFRAME_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


LEADERBOARD_HEADER = "rank,config_hash,seed," + ",".join(SOLVER_FIELDS) + ",outer_iters,psnr,ssim,fsim"


def _fmt_param(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(v)
    return f"{v:.6g}"


def cmd_sweep(manifest: Manifest, threads=None) -> tuple[Path, list]:
    """Run every config of the grid, write ``leaderboard.csv`` sorted by PSNR."""
    n = manifest.n_configs
    if n > manifest.max_runs:
        raise ConfigError(f"sweep has {n} configurations, above the cap of {manifest.max_runs}; "
                          "select a subset of the grid")
    reference = _reference(manifest)
    _ensure_outputs(manifest)
    y, k0, _ = degrade(reference, manifest.degradation)
    configs = list(manifest.configs())
    seed = manifest.degradation.seed
    hashes = [config_hash(c) for c in configs]
    jobs = [(y, k0, c, reference, manifest.outputs / "runs" / h, manifest.emit["curves_csv"])
            for c, h in zip(configs, hashes)]

    nthreads = min(resolve_threads(threads), len(jobs))
    if nthreads > 1:
        with ProcessPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(j) for j in jobs]

    records = [RunRecord(c, h, seed, rep, iters, wall)
               for c, h, (rep, iters, wall) in zip(configs, hashes, results)]
    order = sorted(range(len(records)), key=lambda i: -min(records[i].report.psnr, PSNR_CAP))
    records = [records[i] for i in order]

    lines = [LEADERBOARD_HEADER]
    for rank, r in enumerate(records, 1):
        params = ",".join(_fmt_param(getattr(r.config, f)) for f in SOLVER_FIELDS)
        lines.append(f"{rank},{r.config_hash},{r.seed},{params},{r.outer_iters},{r.report.csv_row()}")
    path = manifest.outputs / "leaderboard.csv"
    atomic_write_text(path, "\n".join(lines) + "\n")

    # wall times vary run to run, so they stay out of the CSV
    timing = {
        "manifest_sha256": manifest.digest,
        "seed": seed,
        "runs": [{"config_hash": r.config_hash, "wall_time_s": round(r.wall_time, 3)} for r in records],
    }
    atomic_write_text(manifest.outputs / "sweep_timing.json", json.dumps(timing, indent=2) + "\n")
    return path, records


def cmd_metrics(manifest: Manifest) -> Path:
    """Score the degraded (and, if present, restored) image against the clean input."""
    reference = _reference(manifest)
    y, _ = _load_observation(manifest)
    rows = [("degraded", quality_report(np.clip(y, 0.0, 1.0), reference))]
    x_path = manifest.outputs / "x.f64"
    if x_path.exists():
        rows.append(("restored", quality_report(read_sidecar(x_path), reference)))
    path = manifest.outputs / "metrics.csv"
    atomic_write_text(path, _report_csv(rows))
    return path
