"""Command-line surface.

Subcommands: evolve, simulate-experiment, fit, plot.  The output directory
resolves as QJSIM_OUT_DIR > --out > config out_dir > current directory.
Exit status is 0 only when every requested sample/fit succeeded, 2 when
estimation failed for some samples, 1 for configuration or input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io
from .config import load_config
from .errors import QjsimError
from .estimate import fit_fringe, fit_populations
from .pipeline import estimate_rows, simulate_experiment, theory_rows
from .plotting import build_panels, render_panels
from .timecourse import run_sweep

ENV_OUT_DIR = "QJSIM_OUT_DIR"


def _resolve_out_dir(args, config=None) -> Path:
    env = os.environ.get(ENV_OUT_DIR)
    if env:
        out = Path(env)
    elif getattr(args, "out", None):
        out = Path(args.out)
    elif config is not None:
        out = Path(config.out_dir)
    else:
        out = Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _apply_overrides(config, args):
    kw = {}
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    if getattr(args, "noiseless", False):
        kw["noiseless"] = True
    return config.override(**kw) if kw else config


def cmd_evolve(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out_dir = _resolve_out_dir(args, config)
    records = run_sweep(config.sweep_spec(), config.state)
    path = io.write_theory_csv(out_dir / "theory.csv", theory_rows(records))
    print(f"wrote {len(records)} theory rows to {path}")
    return 0


def cmd_simulate_experiment(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out_dir = _resolve_out_dir(args, config)
    samples = simulate_experiment(config, out_dir)
    path = io.write_estimates_csv(out_dir / "estimates.csv", estimate_rows(samples))
    failures = [s for s in samples if not s.ok]
    print(
        f"wrote {len(samples)} estimate rows to {path} "
        f"({len(failures)} failed sample(s))"
    )
    for s in failures:
        print(f"  sample p={s.record.sample:g} failed: {s.error}", file=sys.stderr)
    return 2 if failures else 0


def _print_population_report(result) -> None:
    print("image-plane fit")
    print(f"  residual rms: {result.residual_rms:.6g}")
    for m in range(3):
        print(
            f"  mode {m + 1}: center {result.centers[m]:.6g}, "
            f"width {result.widths[m]:.6g}, area {result.areas[m]:.6g}"
        )
    pops = ", ".join(f"{p:.6g}" for p in result.populations)
    print(f"  populations: {pops}")


def _print_fringe_report(result) -> None:
    print("fringe fit")
    print(f"  visibility: {result.visibility:.6g}")
    print(f"  fringe period: {result.fringe_period:.6g}")
    print(f"  envelope width: {result.envelope_width:.6g}")
    print(f"  phase: {result.phase:.6g}")
    print(f"  residual rms: {result.residual_rms:.6g}")
    if result.no_fringe:
        print("  flag: no resolvable fringe (visibility reported as 0)")
    if result.clamped:
        print("  flag: raw visibility above 1 was clamped")


def cmd_fit(args) -> int:
    profile = io.read_profile_csv(args.profile)
    geom = None
    if args.config:
        geom = load_config(args.config).geometry
    out_dir = _resolve_out_dir(args)
    if args.mode == "image":
        result = fit_populations(profile, geom)
        _print_population_report(result)
        header = (
            "center_1,width_1,area_1,center_2,width_2,area_2,"
            "center_3,width_3,area_3,offset,residual_rms,rho11,rho22,rho33"
        )
        row = []
        for m in range(3):
            row += [result.centers[m], result.widths[m], result.areas[m]]
        row += [result.offset, result.residual_rms, *result.populations]
        path = out_dir / "fit_image.csv"
    else:
        result = fit_fringe(profile, geom)
        _print_fringe_report(result)
        header = (
            "amplitude,envelope_width,fringe_period,visibility,phase,offset,"
            "residual_rms,clamped,no_fringe"
        )
        row = [
            result.amplitude,
            result.envelope_width,
            result.fringe_period,
            result.visibility,
            result.phase,
            result.offset,
            result.residual_rms,
            float(result.clamped),
            float(result.no_fringe),
        ]
        path = out_dir / "fit_fringe.csv"
    path.write_text(header + "\n" + ",".join(io.fmt(x) for x in row) + "\n")
    print(f"wrote {path}")
    return 0


def cmd_plot(args) -> int:
    theory = io.read_theory_csv(args.theory) if args.theory else None
    estimates = io.read_estimates_csv(args.estimates) if args.estimates else None
    out_dir = _resolve_out_dir(args)
    panels = build_panels(theory, estimates)
    written = render_panels(panels, out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qjsim",
        description="three-level quantum-jump decay simulator and estimator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="write the theory curves of a sweep")
    p.add_argument("--config", required=True, help="scenario configuration file")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser(
        "simulate-experiment",
        help="render synthetic frames, estimate elements, write estimates",
    )
    p.add_argument("--config", required=True, help="scenario configuration file")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--out", help="output directory")
    p.add_argument(
        "--noiseless",
        action="store_true",
        help="exact expected counts, no Poisson noise, single repetition",
    )
    p.set_defaults(func=cmd_simulate_experiment)

    p = sub.add_parser("fit", help="fit a profile CSV (position,value)")
    p.add_argument("profile", help="profile CSV path")
    p.add_argument("--mode", choices=("image", "fringe"), required=True)
    p.add_argument("--config", help="optional config supplying the geometry hint")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plot", help="plot theory curves and estimates")
    p.add_argument("theory", help="theory CSV path")
    p.add_argument("estimates", nargs="?", help="optional estimates CSV path")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QjsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
