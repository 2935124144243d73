"""Ensemble execution, archive replay and output files.

Frames are cut into fixed-size chunks (``chunk_frames``) independent of the
worker count. Each chunk is simulated and accumulated on its own, and the
per-chunk accumulators are merged in chunk order, so the floating-point
summation order and therefore every output byte is the same for any number
of workers.
"""
from __future__ import annotations

import json
import logging
import math
import shutil
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, kernels, oracle
from .archive import ArchiveWriter, iter_frames, read_header
from .config import ExperimentConfig, format_config, load_config
from .correlator import (CorrelationAccumulator, CorrelationProfile, PairingMode, finalize,
                         jackknife)
from .errors import ArchiveError, ValidationError
from .grid import SampleGrid
from .optics import (ArmGeometry, ObjectSpec, arm1_array, arm2_array, check_sampling,
                     fraunhofer_2f_reference, transmittance)
from .source import SourceSpec, envelope_intensity, realization_array

log = logging.getLogger(__name__)

SIDECAR_SUFFIX = ".cfg"


def _pairings(mode: str) -> list[PairingMode]:
    return {
        "ghost": [PairingMode.GHOST],
        "hbt": [PairingMode.HBT],
        "both": [PairingMode.GHOST, PairingMode.HBT],
        "full_matrix": [PairingMode.FULL],
    }[mode]


@dataclass(frozen=True)
class _Job:
    """Everything a worker needs to simulate any range of frames."""

    grid: SampleGrid
    source: SourceSpec
    geom: ArmGeometry
    t: np.ndarray
    seed: int
    sign: int
    arms: int
    pairings: tuple
    n_blocks: int
    decimation: int
    keep_rows: bool


def prepare(cfg: ExperimentConfig):
    """Run every guard that can fail, before any frame is generated."""
    grid = cfg.grid()
    geom = cfg.geometry()
    obj = cfg.object_spec()
    src = cfg.source()
    t = transmittance(obj, grid, geom.wavelength)
    check_sampling(grid, geom.d1, geom.wavelength, "d1")
    check_sampling(grid, geom.d2, geom.wavelength, "d2")
    if cfg.mode != "hbt":
        check_sampling(grid, geom.d, geom.wavelength, "d")
    envelope_intensity(grid, src)
    return grid, geom, obj, src, t


def _new_accumulators(job: _Job) -> list[CorrelationAccumulator]:
    return [CorrelationAccumulator(job.grid, p, job.n_blocks, job.decimation if p is PairingMode.FULL else 1)
            for p in job.pairings]


def _accumulate(accs, first, rows1, rows2):
    for acc in accs:
        acc.add_block(rows1, None if acc.mode is PairingMode.HBT else rows2, first)


def simulate_rows(job: _Job, first: int, count: int):
    """Detected intensities for frames ``first .. first+count-1``."""
    n = job.grid.n
    rows1 = np.empty((count, n))
    rows2 = np.empty((count, n)) if job.arms == 2 else None
    for k in range(count):
        u = realization_array(job.grid, job.source, job.seed, first + k)
        rows1[k] = np.abs(arm1_array(u, job.t, job.grid, job.geom, job.sign)) ** 2
        if rows2 is not None:
            rows2[k] = np.abs(arm2_array(u, job.grid, job.geom, job.sign)) ** 2
    return rows1, rows2


def _run_chunk(args):
    job, first, count = args
    rows1, rows2 = simulate_rows(job, first, count)
    accs = _new_accumulators(job)
    _accumulate(accs, first, rows1, rows2)
    if job.keep_rows:
        return first, accs, rows1, rows2
    return first, accs, None, None


def _chunks(frames: int, size: int):
    return [(s, min(size, frames - s)) for s in range(0, frames, size)]


def _merge(total, part):
    return part if total is None else [a + b for a, b in zip(total, part)]


@dataclass
class RunResult:
    profiles: dict
    report: dict
    accumulators: dict = field(repr=False, default_factory=dict)
    curves: dict = field(repr=False, default_factory=dict)
    files: list = field(default_factory=list)


class _OutputGuard:
    """Tracks files created by a run and removes them if the run fails."""

    def __init__(self, out_dir: Path | None):
        self.out_dir = out_dir
        self.created_dir = False
        self.files: list[Path] = []

    def __enter__(self):
        if self.out_dir is not None and not self.out_dir.exists():
            try:
                self.out_dir.mkdir(parents=True)
            except OSError as exc:
                raise ArchiveError(f"cannot create output directory {self.out_dir}: {exc}") from None
            self.created_dir = True
        return self

    def track(self, path: Path) -> Path:
        self.files.append(path)
        return path

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            return False
        for p in self.files:
            try:
                p.unlink(missing_ok=True)
            except OSError:
                pass
        if self.created_dir:
            shutil.rmtree(self.out_dir, ignore_errors=True)
        return False


def run_experiment(cfg: ExperimentConfig, out_dir=None, write_outputs: bool = True) -> RunResult:
    """Simulate ``cfg.frames`` frames and write profiles, report and optional archive."""
    action, read_path = cfg.archive_action
    if action == "read":
        return replay_archive(read_path, cfg.mode, cfg=cfg, out_dir=out_dir, write_outputs=write_outputs)
    grid, geom, obj, src, t = prepare(cfg)
    pairings = tuple(_pairings(cfg.mode))
    arms = 1 if cfg.mode == "hbt" else 2
    out = Path(out_dir if out_dir is not None else cfg.outputs) if write_outputs else None
    job = _Job(grid, src, geom, np.ascontiguousarray(t.amplitude), cfg.seed, cfg.kernel_sign, arms,
               pairings, cfg.n_blocks, cfg.block_decimation, action == "write")
    tasks = [(job, s, c) for s, c in _chunks(cfg.frames, cfg.chunk_frames)]

    start = time.perf_counter()
    with _OutputGuard(out) as guard:
        writer = None
        if action == "write":
            if out is None:
                raise ValidationError("archive = write needs an output directory")
            path = guard.track(out / "frames.gsim")
            writer = ArchiveWriter(path, grid, arms, cfg.seed)
            sidecar = guard.track(path.with_name(path.name + SIDECAR_SUFFIX))
            _write_text(sidecar, format_config(cfg))
        total = None
        try:
            for first, accs, rows1, rows2 in _map(tasks, cfg.workers):
                total = _merge(total, accs)
                if writer is not None:
                    writer.write(first, rows1, rows2)
        except BaseException:
            if writer is not None:
                writer.abort()
            raise
        if writer is not None:
            writer.close()
        wall = time.perf_counter() - start
        result = _finish(cfg, {a.mode: a for a in total}, obj, geom, wall,
                         extra={"workers": cfg.workers, "source": "simulation"})
        if out is not None:
            result.files = _write_outputs(result, out, guard)
            if writer is not None:
                result.files.append(str(writer.path))
    return result


def _map(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        for task in tasks:
            yield _run_chunk(task)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_run_chunk, tasks)


def replay_archive(path, mode: str, cfg: ExperimentConfig | None = None, out_dir=None,
                   write_outputs: bool = True) -> RunResult:
    """Correlate frames from an archive exactly as :func:`run_experiment` would.

    ``mode`` is ``ghost``, ``hbt``, ``both`` or ``full_matrix``; ``hbt`` only
    reads arm-1 rows, so a two-arm archive can be re-analysed single-arm.
    The oracle comparison uses ``cfg`` or, failing that, the config saved
    next to the archive.
    """
    path = Path(path)
    header = read_header(path)
    if mode != "hbt" and header.arms != 2:
        raise ValidationError(f"mode {mode} needs a two-arm archive; {path} has one arm")
    if cfg is None:
        side = path.with_name(path.name + SIDECAR_SUFFIX)
        if side.exists():
            cfg = load_config(side)
    if cfg is not None:
        if cfg.grid_n != header.n or cfg.grid_dx != header.dx:
            raise ValidationError("archive grid does not match the configuration")
        cfg = cfg.replace(mode=mode, frames=max(header.frames, 100), seed=header.seed, archive="none")
    n_blocks = cfg.n_blocks if cfg else 20
    chunk = cfg.chunk_frames if cfg else 250
    decimation = cfg.block_decimation if cfg else max(1, header.n // 512)
    job = _Job(header.grid, None, None, None, header.seed, -1, header.arms, tuple(_pairings(mode)),
               n_blocks, decimation, False)
    out = Path(out_dir if out_dir is not None else (cfg.outputs if cfg else "out")) if write_outputs else None

    start = time.perf_counter()
    total = None
    for first, rows1, rows2 in iter_frames(path, chunk=chunk, header=header):
        accs = _new_accumulators(job)
        _accumulate(accs, first, np.ascontiguousarray(rows1),
                    None if rows2 is None else np.ascontiguousarray(rows2))
        total = _merge(total, accs)
    if total is None:
        raise ArchiveError(f"{path} holds no frames")
    wall = time.perf_counter() - start
    obj = cfg.object_spec() if cfg else None
    geom = cfg.geometry() if cfg else None
    result = _finish(cfg, {a.mode: a for a in total}, obj, geom, wall,
                     extra={"source": f"archive:{path}", "frames": header.frames, "seed": header.seed,
                            "mode": mode})
    if out is not None:
        with _OutputGuard(out) as guard:
            result.files = _write_outputs(result, out, guard)
    return result


# ---------------------------------------------------------------------------
# comparison report


def _profile_report(profile: CorrelationProfile, acc, curve, mask) -> dict:
    d = profile.delta_I
    scale = analysis.fit_scale(d, curve.values, mask)
    resid = (d - scale * curve.values)[mask]
    se = profile.std_error
    entry = {
        "bins": int(d.size),
        "rmse_vs_oracle": analysis.normalized_rmse(d, curve.values, mask),
        "correlation_vs_oracle": analysis.correlation(d, curve.values, mask),
        "fit_amplitude": scale,
        "peak_delta_I": float(np.max(d[mask])),
        "peak_g2_minus_1": float(np.max(profile.g2_minus_1[mask])),
        "noise_floor_g2": profile.noise_floor,
        "oracle_formula": curve.formula,
    }
    if se is not None:
        entry["median_std_error_over_peak"] = float(np.median(se[mask]) / scale)
        entry["max_std_error_over_peak"] = float(np.max(se[mask]) / scale)
        entry["coverage_2se"] = float(np.mean(np.abs(resid) <= 2 * se[mask]))
    return entry


def fringe_power(acc: CorrelationAccumulator, template: np.ndarray, mask: np.ndarray,
                 freqs, norm: float | None = None) -> dict:
    """Fourier coefficients of ``delta_I - s * template`` with jackknife errors.

    ``s`` is refitted for every replicate. Coefficients are divided by the
    fixed ``norm`` (default: the full-sample ``s``), giving units of peak
    times meters.
    """
    x = acc.coordinate
    if norm is None:
        norm = analysis.fit_scale(finalize(acc).delta_I, template, mask)

    def stat(delta, m1, m2):
        s = analysis.fit_scale(delta, template, mask)
        return analysis.fringe_coefficients(x, (delta - s * template) / norm, freqs, mask)

    full, se, _ = jackknife(acc, stat)
    ratio = np.abs(full) / np.where(se > 0, se, np.inf)
    return {"frequencies_per_m": [float(f) for f in np.atleast_1d(freqs)],
            "magnitude": [float(v) for v in np.abs(full)],
            "std_error": [float(v) for v in se],
            "ratio_to_std_error": [float(v) for v in ratio]}


def _finish(cfg, accs: dict, obj: ObjectSpec | None, geom: ArmGeometry | None, wall: float,
            extra: dict) -> RunResult:
    any_acc = next(iter(accs.values()))
    frames = any_acc.count
    report = {
        "frames": frames,
        "seed": cfg.seed if cfg else extra.get("seed"),
        "mode": cfg.mode if cfg else extra.get("mode"),
        "wall_time_s": wall,
        "frames_per_s": frames / wall if wall > 0 else None,
        "backend": kernels.BACKEND,
        "n_blocks": any_acc.n_blocks,
        "grid": {"n": any_acc.grid.n, "dx_m": any_acc.grid.dx},
    }
    report.update({k: v for k, v in extra.items() if k not in report})
    profiles = {}
    curves = {}
    for mode, acc in accs.items():
        profiles[mode] = finalize(acc)

    if obj is not None and geom is not None:
        period = analysis.ghost_fringe_period(obj, geom)
        report["ghost_fringe_period_m"] = period
        report["comparison_window_m"] = 3 * period
        for mode, prof in profiles.items():
            x = prof.coordinate
            if mode is PairingMode.FULL:
                m = x.size
                idx = np.arange(1, m)
                anti = prof.delta_I[idx, (m - idx) % m]
                xs = x[idx]
                curve = oracle.analytic_ghost_profile(obj, geom, xs)
                mask = analysis.central_mask(xs, period)
                report["full_matrix_antidiagonal"] = {
                    "rmse_vs_oracle": analysis.normalized_rmse(anti, curve.values, mask),
                    "correlation_vs_oracle": analysis.correlation(anti, curve.values, mask),
                    "decimation": accs[mode].decimation,
                }
                continue
            builder = oracle.analytic_ghost_profile if mode is PairingMode.GHOST else oracle.analytic_hbt_profile
            curve = builder(obj, geom, x)
            curves[mode] = curve
            mask = analysis.central_mask(x, period)
            entry = _profile_report(prof, accs[mode], curve, mask)
            if mode is PairingMode.GHOST:
                entry["peak_table"] = analysis.peak_table(x, prof.delta_I, period)
            if accs[mode].count >= 10:
                freqs = [k / period for k in (1, 2)]
                hbt_curve = oracle.analytic_hbt_profile(obj, geom, x)
                entry["fringe_power_vs_aperture_envelope"] = fringe_power(
                    accs[mode], hbt_curve.values, mask, freqs, norm=entry["fit_amplitude"])
            report[mode.value] = entry

        if PairingMode.GHOST in profiles:
            prof = profiles[PairingMode.GHOST]
            ref = fraunhofer_2f_reference(transmittance(obj, SampleGrid(cfg.grid_n, cfg.grid_dx), geom.wavelength),
                                          cfg.focal_length, geom.wavelength)
            ref_period = analysis.fraunhofer_fringe_period(obj, cfg.focal_length, geom.wavelength)
            ref_x = np.asarray(ref.grid.x)
            ref_y = ref.intensity / ref.intensity.max()
            curves["reference_2f"] = oracle.AnalyticCurve(ref_x, ref_y, "fraunhofer_2f_numeric")
            g_spacing, _ = analysis.principal_spacing(prof.coordinate, prof.delta_I, period)
            r_spacing, _ = analysis.principal_spacing(ref_x, ref_y, ref_period)
            mask = analysis.central_mask(prof.coordinate, period)
            report["spacing"] = {
                "ghost_principal_spacing_m": g_spacing,
                "reference_2f_principal_spacing_m": r_spacing,
                "ratio": g_spacing / r_spacing,
                "scale_fit_ratio": analysis.scale_fit(prof.coordinate, prof.delta_I, ref_x, ref_y, mask),
                "focal_length_m": cfg.focal_length,
                "reference_peak_table": analysis.peak_table(ref_x, ref_y, ref_period),
            }
    return RunResult(profiles, report, accs, curves)


# ---------------------------------------------------------------------------
# files


def _write_text(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ArchiveError(f"cannot write {path}: {exc}") from None


def _fmt(v) -> str:
    return "nan" if v is None else repr(float(v))


def profile_csv(profile: CorrelationProfile, oracle_values=None, meta: str = "") -> str:
    lines = [f"# mode={profile.mode.value} frames={profile.count} coordinate=x2 units=m {meta}".rstrip()]
    if profile.mode is PairingMode.FULL:
        lines.append("x1_m,x2_m,delta_I,g2_minus_1")
        x = profile.coordinate
        for i in range(x.size):
            for j in range(x.size):
                lines.append(",".join(_fmt(v) for v in (x[i], x[j], profile.delta_I[i, j],
                                                        profile.g2_minus_1[i, j])))
        return "\n".join(lines) + "\n"
    lines.append("x_m,delta_I,std_error,g2_minus_1,oracle_unit_peak")
    se = profile.std_error
    for k, x in enumerate(profile.coordinate):
        lines.append(",".join([
            _fmt(x), _fmt(profile.delta_I[k]), _fmt(None if se is None else se[k]),
            _fmt(profile.g2_minus_1[k]), _fmt(None if oracle_values is None else oracle_values[k]),
        ]))
    return "\n".join(lines) + "\n"


_CSV_NAMES = {PairingMode.GHOST: "ghost_profile.csv", PairingMode.HBT: "hbt_profile.csv",
              PairingMode.FULL: "full_matrix.csv"}


def _write_outputs(result: RunResult, out: Path, guard: _OutputGuard) -> list[str]:
    files = []
    curves = result.curves
    meta = f"seed={result.report.get('seed')}"
    for mode, prof in result.profiles.items():
        curve = curves.get(mode)
        path = guard.track(out / _CSV_NAMES[mode])
        _write_text(path, profile_csv(prof, None if curve is None else curve.values, meta))
        files.append(str(path))
    ref = curves.get("reference_2f")
    if ref is not None:
        path = guard.track(out / "reference_2f.csv")
        body = ["# mode=fraunhofer_2f coordinate=x units=m", "x_m,intensity_unit_peak"]
        body += [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(ref.coordinate, ref.values)]
        _write_text(path, "\n".join(body) + "\n")
        files.append(str(path))
    path = guard.track(out / "report.json")
    _write_text(path, json.dumps(_jsonable(result.report), indent=2, sort_keys=True) + "\n")
    files.append(str(path))
    return files


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def emit_oracle(cfg: ExperimentConfig, out_dir=None, closed_forms: bool = False) -> list[str]:
    """Write the analytic ghost, HBT and 2f curves for ``cfg`` without simulating.

    With ``closed_forms`` a phase-grating config also gets
    ``oracle_closed_form.csv``: the direct transform next to the five-zone
    closed form with outer cosine coefficient 2 (derived) and 4 (a commonly
    quoted variant), for comparison.
    """
    grid, geom, obj, _, t = prepare(cfg)
    out = Path(out_dir if out_dir is not None else cfg.outputs)
    x = np.asarray(grid.x[1:])
    ghost = oracle.analytic_ghost_profile(obj, geom, x)
    hbt = oracle.analytic_hbt_profile(obj, geom, x)
    xf = np.asarray(fraunhofer_2f_reference(t, cfg.focal_length, geom.wavelength).grid.x)
    ref = oracle.analytic_fraunhofer_profile(obj, cfg.focal_length, geom.wavelength, xf)
    files = []
    with _OutputGuard(out) as guard:
        for name, curve, what in (("oracle_ghost.csv", ghost, "ghost_symmetric"),
                                  ("oracle_hbt.csv", hbt, "hbt_symmetric"),
                                  ("oracle_2f.csv", ref, "fraunhofer_2f")):
            path = guard.track(out / name)
            body = [f"# mode={what} formula={curve.formula} units=m", "x_m,unit_peak"]
            body += [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(curve.coordinate, curve.values)]
            _write_text(path, "\n".join(body) + "\n")
            files.append(str(path))
        if closed_forms:
            if obj.kind != "phase_grating":
                raise ValidationError("closed forms exist only for object = phase_grating")
            two = oracle.five_zone_closed_form(x, obj.zone_width, geom.d2, geom.wavelength, 2.0)
            four = oracle.five_zone_closed_form(x, obj.zone_width, geom.d2, geom.wavelength, 4.0)
            path = guard.track(out / "oracle_closed_form.csv")
            body = ["# mode=ghost_symmetric units=m each column normalized to unit peak",
                    "x_m,direct_transform,outer_coefficient_2,outer_coefficient_4"]
            body += [",".join(_fmt(v) for v in row)
                     for row in zip(x, ghost.values, two.values, four.values)]
            _write_text(path, "\n".join(body) + "\n")
            files.append(str(path))
    return files
