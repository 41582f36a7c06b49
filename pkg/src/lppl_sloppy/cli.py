"""Command line entry point: ``lppl {fit,sloppy,track,synth,mc,replay}``.

Every command writes its outputs plus ``manifest.json`` into ``--output-dir``.
``lppl replay MANIFEST --output-dir DIR`` reruns the recorded command and
reproduces the outputs byte for byte.  Exit codes: 0 success, 1 input or I/O
error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import LpplError, ParseError
from .fitter import FitConfig, FitResult, multistart_fit
from .io import atomic_write, dumps_json, fmt_float, load_csv, series_to_csv
from .mc import DEFAULT_LEVELS, McConfig, default_window_ends, run_mc
from .model import PARAM_NAMES, Model, PriceSeries, eval_lppl
from .objective import hessian_of_s
from .parallel import resolve_threads
from .sloppy import rolling_track, sloppiness_report
from .synth import SynthSpec, make_series

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
MANIFEST = "manifest.json"


class InputError(Exception):
    pass


def _fit_config(args) -> FitConfig:
    return FitConfig(n_starts=args.starts, seed=args.seed, model=Model(args.model))


def _load_series(args) -> PriceSeries:
    if not args.input:
        raise InputError("--input is required")
    return load_csv(args.input, log_scale=args.log_price)


def _fit_report(fit: FitResult, series: PriceSeries, model: Model) -> dict:
    return {
        "model": model.value,
        "scale": series.scale.value,
        "t0": series.t0,
        "t1": series.t1,
        "params": fit.params.as_dict(),
        "S": fit.s,
        "n": fit.n_params,
        "converged": fit.converged,
        "status": fit.status,
        "iterations": fit.iterations,
        "start_index": fit.start_index,
    }


def _residuals_csv(fit: FitResult, series: PriceSeries) -> str:
    fitted = eval_lppl(fit.params, series.times)
    lines = ["t,price,fitted,residual"]
    for t, p, f in zip(series.times, series.values, fitted):
        lines.append(f"{int(t)},{fmt_float(p)},{fmt_float(f)},{fmt_float(f - p)}")
    return "\n".join(lines) + "\n"


def _parse_window_ends(text: str) -> tuple:
    try:
        a, b, step = (int(x) for x in text.split(":"))
    except ValueError:
        raise InputError(f"--window-ends expects a:b:step, got {text!r}") from None
    if step < 1 or b < a:
        raise InputError(f"bad --window-ends {text!r}")
    return tuple(range(a, b + 1, step))


def _parse_levels(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise InputError(f"--levels expects comma-separated probabilities, got {text!r}") from None


def cmd_fit(args, threads):
    series = _load_series(args)
    config = _fit_config(args)
    fit = multistart_fit(series, config)
    return {
        "fit.json": dumps_json(_fit_report(fit, series, config.model)),
        "residuals.csv": _residuals_csv(fit, series),
    }


def cmd_sloppy(args, threads):
    series = _load_series(args)
    config = _fit_config(args)
    fit = multistart_fit(series, config)
    names = tuple(PARAM_NAMES[i] for i in config.model.free_index)
    report = sloppiness_report(hessian_of_s(fit.params, series, config.model), names)
    return {
        "fit.json": dumps_json(_fit_report(fit, series, config.model)),
        "eigen.json": report.to_json(),
        "eigen.csv": report.to_csv(),
    }


def cmd_track(args, threads):
    series = _load_series(args)
    config = _fit_config(args)
    tc = args.tc
    if tc is None:
        tc = multistart_fit(series, config).params.t_c
    track = rolling_track(series, tc, args.horizon, args.stride, config, threads=threads)
    return {"track.csv": track.to_csv()}


def _synth_spec(args) -> SynthSpec:
    spec = SynthSpec.load(args.spec) if args.spec else SynthSpec()
    if args.noise_seed is not None:
        d = spec.to_dict()
        d["seed"] = args.noise_seed
        spec = SynthSpec.from_dict(d)
    return spec


def cmd_synth(args, threads):
    spec = _synth_spec(args)
    series = make_series(spec, args.sample)
    return {"series.csv": series_to_csv(series), "spec.json": dumps_json(spec.to_dict())}


def cmd_mc(args, threads):
    spec = _synth_spec(args)
    ends = _parse_window_ends(args.window_ends) if args.window_ends else default_window_ends(spec)
    config = McConfig(spec=spec, n_samples=args.samples, window_ends=ends,
                      fit_config=_fit_config(args), confidence_levels=_parse_levels(args.levels))
    summary = run_mc(config, threads=threads)
    return {"mc.csv": summary.to_csv()}


COMMANDS = {"fit": cmd_fit, "sloppy": cmd_sloppy, "track": cmd_track, "synth": cmd_synth, "mc": cmd_mc}


def _add_common(p, input_required=True, starts=500):
    p.add_argument("--output-dir", required=True)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $LPPL_THREADS or 1); never changes results")
    if input_required:
        p.add_argument("--input", help="CSV with rows t,price")
        p.add_argument("--log-price", action="store_true", help="fit the natural log of the prices")
    p.add_argument("--model", choices=[m.value for m in Model], default=Model.LPPL.value)
    p.add_argument("--starts", type=int, default=starts, help="multistart count")
    p.add_argument("--seed", type=int, default=0, help="multistart seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lppl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("fit", help="multistart LPPL fit"))
    _add_common(sub.add_parser("sloppy", help="Hessian eigen-analysis at the best fit"))
    p = sub.add_parser("track", help="nonlinear eigenvalues over the last days of a series")
    _add_common(p, starts=100)
    p.add_argument("--horizon", type=int, default=150)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--tc", type=float, default=None, help="reference t_c (default: fitted)")

    for name, helptext in (("synth", "synthetic LPPL + AR(1) series"),
                           ("mc", "expanding-window Monte Carlo of t_c")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p, input_required=False, starts=50)
        p.add_argument("--spec", help="SynthSpec JSON (default: 1987 reference)")
        p.add_argument("--noise-seed", type=int, default=None)
        if name == "synth":
            p.add_argument("--sample", type=int, default=0, help="noise realization index")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--window-ends", default=None, help="a:b:step, inclusive")
    p.add_argument("--levels", default=",".join(f"{x:g}" for x in DEFAULT_LEVELS))

    p = sub.add_parser("replay", help="rerun a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--threads", type=int, default=None)
    return parser


def _manifest(args) -> dict:
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "output_dir", "threads")}
    for key in ("input", "spec"):
        if config.get(key):
            config[key] = str(Path(config[key]).resolve())
    return {
        "command": args.command,
        "version": __version__,
        "input_path": config.get("input"),
        "output_dir": str(args.output_dir),
        "config": config,
        "seed": args.seed,
    }


def run(args) -> int:
    if args.command == "replay":
        try:
            manifest = json.loads(Path(args.manifest).read_text())
            replay = argparse.Namespace(**manifest["config"], command=manifest["command"],
                                        output_dir=args.output_dir, threads=args.threads)
        except (OSError, ValueError, KeyError) as exc:
            print(f"lppl: cannot read manifest: {exc}", file=sys.stderr)
            return EXIT_INPUT
        return run(replay)

    threads = resolve_threads(args.threads)
    try:
        outputs = COMMANDS[args.command](args, threads)
    except (InputError, ParseError, OSError) as exc:
        print(f"lppl: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (LpplError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"lppl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = Path(args.output_dir)
    try:
        for name, text in outputs.items():
            atomic_write(out / name, text)
        atomic_write(out / MANIFEST, dumps_json(_manifest(args)))
    except OSError as exc:
        print(f"lppl: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def main(argv=None) -> int:
    return run(build_parser().parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
