"""Command-line driver.

Exit codes: 0 success, 1 invalid input, 2 numerical guard, 3 I/O.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import kernels
from .config import load_config
from .errors import ArchiveError, GhostDiffError, NumericalGuardError, ValidationError
from .runner import emit_oracle, prepare, replay_archive, run_experiment

EXIT_OK, EXIT_VALIDATION, EXIT_GUARD, EXIT_IO = 0, 1, 2, 3


def _overrides(args) -> dict:
    out = {}
    for key in ("frames", "seed", "workers"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if getattr(args, "out", None) is not None:
        out["outputs"] = args.out
    return out


def _config(args):
    cfg = load_config(args.config)
    changes = _overrides(args)
    return cfg.replace(**changes) if changes else cfg


def _summary(report: dict) -> str:
    lines = [f"frames={report['frames']} wall={report['wall_time_s']:.2f}s backend={report['backend']}"]
    for key in ("ghost_symmetric", "hbt_symmetric"):
        if key in report:
            r = report[key]
            lines.append(f"{key}: rmse_vs_oracle={r['rmse_vs_oracle']:.4f} "
                         f"corr={r['correlation_vs_oracle']:.4f}")
    if "spacing" in report:
        lines.append(f"spacing ratio ghost/2f={report['spacing']['ratio']:.4f}")
    return "\n".join(lines)


def cmd_run(args):
    cfg = _config(args)
    result = run_experiment(cfg)
    print(_summary(result.report))
    for f in result.files:
        print(f"wrote {f}")


def cmd_replay(args):
    cfg = _config(args) if args.config else None
    out = args.out if args.out is not None else (cfg.outputs if cfg else "out")
    result = replay_archive(args.archive, args.mode, cfg=cfg, out_dir=out)
    print(_summary(result.report))
    for f in result.files:
        print(f"wrote {f}")


def cmd_oracle(args):
    cfg = _config(args)
    for f in emit_oracle(cfg, closed_forms=args.closed_forms):
        print(f"wrote {f}")


def cmd_validate(args):
    cfg = _config(args)
    grid, geom, obj, src, _ = prepare(cfg)
    print(json.dumps({
        "mode": cfg.mode, "frames": cfg.frames, "seed": cfg.seed,
        "grid": {"n": grid.n, "dx_m": grid.dx, "extent_m": grid.extent},
        "geometry_m": {"d1": geom.d1, "d2": geom.d2, "d": geom.d, "wavelength": geom.wavelength},
        "object": obj.kind, "aperture_m": obj.total_aperture,
        "spot_diameter_m": src.spot_diameter, "backend": kernels.BACKEND,
    }, indent=2))
    print("configuration ok")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghostdiff", description="Ghost-diffraction Monte-Carlo simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, frames=True):
        if frames:
            sp.add_argument("--frames", type=int)
            sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out")

    sp = sub.add_parser("run", help="simulate an ensemble and write profiles")
    sp.add_argument("config")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("replay", help="correlate frames from an archive")
    sp.add_argument("archive")
    sp.add_argument("--mode", choices=["ghost", "hbt"], required=True)
    sp.add_argument("--config", help="config for the oracle comparison (default: the archive's sidecar)")
    common(sp, frames=False)
    sp.set_defaults(func=cmd_replay)

    sp = sub.add_parser("oracle", help="write the analytic curves only")
    sp.add_argument("config")
    sp.add_argument("--closed-forms", action="store_true",
                    help="also write the five-zone closed form with outer coefficients 2 and 4")
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("validate", help="check a config and every guard without simulating")
    sp.add_argument("config")
    common(sp)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ArchiveError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, GhostDiffError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
