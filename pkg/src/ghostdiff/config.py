"""Flat ``key = value`` experiment files.

Lengths are in meters. Omitted keys take the defaults of the selected
``preset`` (``full_size`` unless stated). Every error names the offending line.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ArchiveError, ValidationError
from .grid import SampleGrid
from .optics import OBJECT_KINDS, ArmGeometry, ObjectSpec
from .source import ENVELOPES, SourceSpec

MODES = ("ghost", "hbt", "both", "full_matrix")
MIN_FRAMES = 100

PRESETS = {
    "full_size": dict(
        wavelength=0.532e-6, d1=0.060, d2=0.075, d=0.135, spot_diameter=3e-3,
        zone_width=150e-6, groove_depth=0.47e-6, refractive_index=1.57,
        grid_n=4096, grid_dx=1e-6, frames=10_000, focal_length=0.075,
    ),
    # every length scaled by 0.1, wavelength and groove depth included, so the
    # Fresnel numbers and the groove phase match the full-size setup
    "miniature": dict(
        wavelength=0.0532e-6, d1=0.006, d2=0.0075, d=0.0135, spot_diameter=0.3e-3,
        zone_width=15e-6, groove_depth=0.047e-6, refractive_index=1.57,
        grid_n=128, grid_dx=1.2e-6, frames=100_000, focal_length=0.0075,
    ),
}

# accepted ranges in SI units; values outside almost always mean a unit slip
_RANGES = {
    "wavelength": (1e-8, 1e-4),
    "d1": (1e-6, 100.0),
    "d2": (1e-6, 100.0),
    "d": (1e-6, 100.0),
    "spot_diameter": (1e-7, 1.0),
    "zone_width": (1e-8, 0.1),
    "total_aperture": (1e-8, 0.5),
    "slit_separation": (1e-8, 0.5),
    "groove_depth": (0.0, 1e-3),
    "refractive_index": (1.0, 5.0),
    "grid_dx": (1e-9, 1e-3),
    "focal_length": (1e-4, 100.0),
    "mean_intensity": (1e-300, 1e300),
}


@dataclass
class ExperimentConfig:
    wavelength: float = 0.532e-6
    d1: float = 0.060
    d2: float = 0.075
    d: float = 0.135
    spot_diameter: float = 3e-3
    mean_intensity: float = 1.0
    envelope: str = "hard"
    object: str = "phase_grating"
    zone_width: float = 150e-6
    groove_depth: float = 0.47e-6
    refractive_index: float = 1.57
    total_aperture: float | None = None
    slit_separation: float | None = None
    pieces: tuple = ()
    grid_n: int = 4096
    grid_dx: float = 1e-6
    frames: int = 10_000
    seed: int = 1
    mode: str = "both"
    outputs: str = "out"
    archive: str = "none"
    workers: int = 1
    focal_length: float = 0.075
    kernel_sign: int = -1
    n_blocks: int = 20
    chunk_frames: int = 250
    decimation: int = 0
    preset: str = "full_size"
    source_path: str | None = None
    lines: dict = field(default_factory=dict, repr=False, compare=False)

    # derived views -----------------------------------------------------
    def geometry(self) -> ArmGeometry:
        return ArmGeometry(self.d1, self.d2, self.d, self.wavelength)

    def source(self) -> SourceSpec:
        return SourceSpec(self.spot_diameter, self.mean_intensity, self.envelope)

    def grid(self) -> SampleGrid:
        return SampleGrid(self.grid_n, self.grid_dx)

    def object_spec(self) -> ObjectSpec:
        kind = self.object
        if kind == "phase_grating":
            return ObjectSpec.phase_grating(self.zone_width, self.groove_depth, self.refractive_index)
        if kind == "double_slit":
            sep = self.slit_separation if self.slit_separation is not None else 3 * self.zone_width
            return ObjectSpec.double_slit(self.zone_width, sep)
        if kind == "open_aperture":
            return ObjectSpec.open_aperture(self.total_aperture or 5 * self.zone_width)
        if kind == "opaque_edge":
            return ObjectSpec.opaque_edge(self.total_aperture or 5 * self.zone_width)
        return ObjectSpec.piecewise(self.pieces, self.total_aperture)

    @property
    def archive_action(self) -> tuple[str, str | None]:
        if self.archive in ("none", "write"):
            return self.archive, None
        return "read", self.archive[len("read:"):]

    @property
    def block_decimation(self) -> int:
        """Column stride for the full matrix; defaults to at most 512 columns."""
        if self.decimation:
            return self.decimation
        return max(1, self.grid_n // 512)

    def replace(self, **changes) -> "ExperimentConfig":
        out = dataclasses.replace(self, **changes)
        out.lines = dict(self.lines)
        for key in changes:
            out.lines.pop(key, None)
        validate(out)
        return out


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)
           if f.name not in ("lines", "source_path")}
_INTS = {"grid_n", "frames", "seed", "workers", "kernel_sign", "n_blocks", "chunk_frames", "decimation"}
_OPTIONAL_FLOATS = {"total_aperture", "slit_separation"}
_STRINGS = {"envelope", "object", "mode", "outputs", "archive", "preset"}


def _parse_pieces(text: str, lineno: int) -> tuple:
    """``lo,hi,amplitude,phase; ...`` with the phase in radians."""
    pieces = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) not in (3, 4):
            raise ValidationError(f"piece {chunk!r} needs lo,hi,amplitude[,phase]", lineno)
        try:
            lo, hi, amp = (float(p) for p in parts[:3])
            phase = float(parts[3]) if len(parts) == 4 else 0.0
        except ValueError:
            raise ValidationError(f"piece {chunk!r} is not numeric", lineno) from None
        pieces.append((lo, hi, amp * complex(math.cos(phase), math.sin(phase))))
    if not pieces:
        raise ValidationError("pieces is empty", lineno)
    return tuple(pieces)


def _convert(key: str, raw: str, lineno: int):
    if key == "pieces":
        return _parse_pieces(raw, lineno)
    if key in _STRINGS:
        return raw
    if key in _INTS:
        try:
            value = float(raw)
        except ValueError:
            raise ValidationError(f"{key} must be an integer, got {raw!r}", lineno) from None
        if not value.is_integer():
            raise ValidationError(f"{key} must be an integer, got {raw!r}", lineno)
        return int(value)
    if key in _OPTIONAL_FLOATS and raw.lower() == "none":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ValidationError(f"{key} must be a number in SI units, got {raw!r}", lineno) from None
    if not math.isfinite(value):
        raise ValidationError(f"{key} must be finite, got {raw!r}", lineno)
    return value


def parse_config(text: str, source_path: str | None = None) -> ExperimentConfig:
    entries: dict[str, tuple[object, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"expected 'key = value', got {line!r}", lineno)
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ValidationError(f"unknown key {key!r}", lineno)
        if key in entries:
            raise ValidationError(f"duplicate key {key!r} (first set on line {entries[key][1]})", lineno)
        if not raw:
            raise ValidationError(f"{key} has no value", lineno)
        entries[key] = (_convert(key, raw, lineno), lineno)

    preset = entries.get("preset", ("full_size", None))
    if preset[0] not in PRESETS:
        raise ValidationError(f"preset must be one of {sorted(PRESETS)}, got {preset[0]!r}", preset[1])
    values = dict(PRESETS[preset[0]])
    values.update({k: v for k, (v, _) in entries.items()})
    cfg = ExperimentConfig(**values, source_path=source_path,
                           lines={k: ln for k, (_, ln) in entries.items()})
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{path} is not UTF-8 text: {exc}") from None
    except OSError as exc:
        raise ArchiveError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    line = cfg.lines.get

    for key, (lo, hi) in _RANGES.items():
        value = getattr(cfg, key)
        if value is None:
            continue
        if key == "groove_depth":
            ok = lo <= value <= hi
        else:
            ok = lo <= value <= hi and value > 0
        if not ok:
            raise ValidationError(f"{key} = {value:g} m is outside the accepted range "
                                  f"[{lo:g}, {hi:g}] (SI units)", line(key))
    for key, choices in (("envelope", ENVELOPES), ("object", OBJECT_KINDS), ("mode", MODES)):
        if getattr(cfg, key) not in choices:
            raise ValidationError(f"{key} must be one of {list(choices)}, got {getattr(cfg, key)!r}", line(key))
    if not (cfg.archive in ("none", "write") or (cfg.archive.startswith("read:") and len(cfg.archive) > 5)):
        raise ValidationError(f"archive must be none, write or read:<path>, got {cfg.archive!r}", line("archive"))
    if cfg.grid_n < 8 or cfg.grid_n & (cfg.grid_n - 1):
        raise ValidationError(f"grid_n must be a power of two >= 8, got {cfg.grid_n}", line("grid_n"))
    if not 0 <= cfg.seed < 1 << 64:
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {cfg.seed}", line("seed"))
    for key in ("workers", "n_blocks", "chunk_frames"):
        if getattr(cfg, key) < 1:
            raise ValidationError(f"{key} must be positive, got {getattr(cfg, key)}", line(key))
    if cfg.decimation < 0 or (cfg.decimation and cfg.grid_n % cfg.decimation):
        raise ValidationError("decimation must divide grid_n", line("decimation"))
    if cfg.kernel_sign not in (-1, 1):
        raise ValidationError(f"kernel_sign must be -1 or 1, got {cfg.kernel_sign}", line("kernel_sign"))
    if cfg.frames < MIN_FRAMES:
        raise ValidationError(f"frames = {cfg.frames} is below the statistical minimum of {MIN_FRAMES}",
                              line("frames"))
    if cfg.object == "piecewise" and not cfg.pieces:
        raise ValidationError("object = piecewise needs a pieces entry", line("object"))
    if cfg.mode != "hbt" and abs(cfg.d - (cfg.d1 + cfg.d2)) > 1e-12 * max(cfg.d, 1.0):
        where = line("d") or max((line(k) or 0) for k in ("d1", "d2")) or None
        raise ValidationError(
            f"mode {cfg.mode} requires d = d1 + d2 (ghost imaging condition); "
            f"got d = {cfg.d:g} m, d1 + d2 = {cfg.d1 + cfg.d2:g} m", where)
    try:
        cfg.object_spec()
    except ValidationError as exc:
        where = max((line(k) or 0) for k in ("object", "zone_width", "total_aperture",
                                               "slit_separation", "pieces")) or None
        raise ValidationError(str(exc), where) from None
    return cfg


def format_config(cfg: ExperimentConfig) -> str:
    """Text that :func:`parse_config` reads back into the same settings."""
    out = []
    for name in _FIELDS:
        value = getattr(cfg, name)
        if value is None:
            value = "none"
        elif name == "pieces":
            if not value:
                continue
            value = "; ".join(f"{lo!r},{hi!r},{abs(t)!r},{math.atan2(t.imag, t.real)!r}" for lo, hi, t in value)
        elif isinstance(value, float):
            value = repr(value)
        out.append(f"{name} = {value}")
    return "\n".join(out) + "\n"
