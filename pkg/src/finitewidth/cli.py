"""Command-line entry point.

    finitewidth simulate --width 128 --samples 10000000 --out runs/n128
    finitewidth sweep --widths 8:128:8 --samples 1000000 --out runs/sweep
    finitewidth predict --width 128 --activation relu --init glorot_uniform --x 1
    finitewidth rg --out runs/rg

Exit status: 0 on success, 1 on a runtime/numerical failure, 2 on a usage
error (always detected before any sampling starts).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .config import ActivationKind, EnsembleSpec, InitScheme, NetworkConfig, ValidationError, validate_spec
from .edgeworth import EdgeworthFit, FitError, fit_alpha, fit_power_law, model_cdf_diff
from .oracle import DegenerateError, QuadratureError, predict
from .rg import GriddedDensity, ResolutionError, TruncationError, eigenvalue_table, iterate_to_fixed_point
from .sampler import run_ensemble
from .stats import CapacityError, InsufficientDataError, ecdf_diff

log = logging.getLogger("finitewidth")

DEFAULT_SWEEP = "8:148:8"
RUNTIME_ERRORS = (FitError, DegenerateError, QuadratureError, TruncationError, ResolutionError,
                  InsufficientDataError, CapacityError, OSError, ArithmeticError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _init_arg(text):
    try:
        return InitScheme.parse(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_spec_args(p, samples_default):
    p.add_argument("--config", type=Path, help="EnsembleSpec JSON; explicit flags override it")
    p.add_argument("--width", type=int)
    p.add_argument("--activation", choices=[a.value for a in ActivationKind])
    p.add_argument("--init", type=_init_arg, metavar="SCHEME",
                   help="glorot_uniform | uniform:LIMIT | normal:STD (both layers)")
    p.add_argument("--x", type=float, help="probe input")
    p.add_argument("--samples", type=int, help=f"ensemble size (default {samples_default:g})")
    p.add_argument("--seed", type=int)
    p.set_defaults(samples_default=samples_default)


def _add_run_args(p):
    p.add_argument("--threads", type=int, default=1, help="worker threads (never changes results)")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finitewidth", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="one ensemble -> run.json, fig1.csv, ecdf_diff.csv")
    _add_spec_args(p, 1_000_000)
    _add_run_args(p)

    p = sub.add_parser("sweep", help="ensembles over a width range -> fig2.csv, sweep.json")
    _add_spec_args(p, 1_000_000)
    p.add_argument("--widths", default=DEFAULT_SWEEP, metavar="START:STOP:STEP",
                   help=f"inclusive width range (default {DEFAULT_SWEEP})")
    _add_run_args(p)

    p = sub.add_parser("predict", help="analytic prediction only (JSON on stdout)")
    _add_spec_args(p, 1)

    p = sub.add_parser("rg", help="renormalization eigenvalues -> rg.csv")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--points", type=int, default=4096)
    p.add_argument("--hi", type=float, default=12.0)
    p.add_argument("--out", type=Path, default=Path("."))
    return parser


def spec_from_args(args) -> EnsembleSpec:
    base = {}
    if args.config is not None:
        try:
            base = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    overrides = {"width": args.width, "activation": args.activation, "x": args.x,
                 "n_samples": args.samples, "seed": args.seed}
    base.update({k: v for k, v in overrides.items() if v is not None})
    if args.init is not None:
        base["init_hidden"] = base["init_output"] = args.init.to_json()
    base.setdefault("width", 128)
    base.setdefault("n_samples", args.samples_default)
    try:
        spec = EnsembleSpec.from_json(base)
    except (ValidationError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid spec: {exc}") from None
    problems = validate_spec(spec)
    if problems:
        raise UsageError("invalid spec: " + "; ".join(problems))
    return spec


def _parse_widths(text: str) -> list[int]:
    try:
        start, stop, step = (int(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"--widths must look like START:STOP:STEP, got {text!r}") from None
    if step < 1 or start < 1:
        raise UsageError("--widths needs START >= 1 and STEP >= 1")
    return list(range(start, stop + 1, step))


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _fit_run(spec, summary):
    """ECDF-difference table and amplitude fit, or (None, None) when too small to fit."""
    acc = summary.moments
    if acc.count < 2:
        return None, None
    var = acc.finalize().variance
    if var <= 0:
        return None, None
    try:
        table = ecdf_diff(summary.ecdf, math.sqrt(var))
    except InsufficientDataError as exc:
        log.warning("skipping Edgeworth fit: %s", exc)
        return None, None
    fit = fit_alpha(table, spec.network.width)
    kurt = acc.finalize().excess_kurtosis
    if kurt is not None and fit.alpha * kurt > 0:
        log.warning("fitted alpha %.4g has the same sign as excess kurtosis %.4g", fit.alpha, kurt)
    return table, fit


def emit_fig1(path: Path, table, fit: EdgeworthFit) -> None:
    model = model_cdf_diff(table.z, fit.alpha)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "ecdf_diff", "model_diff"])
        for row in zip(table.z, table.d, model):
            w.writerow([repr(float(v)) for v in row])


def emit_fig2(path: Path, rows) -> None:
    """``rows`` are ``(width, alpha, predicted_alpha)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["width", "alpha_abs", "alpha_sign", "pred_alpha_abs"])
        for width, alpha, pred in rows:
            w.writerow([width, repr(abs(alpha)), 1 if alpha > 0 else -1, repr(abs(pred))])


def _oracle_record(spec):
    try:
        return predict(spec.network, spec.x)
    except DegenerateError:
        return None


def cmd_simulate(args) -> int:
    spec = spec_from_args(args)
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    summary = run_ensemble(spec, workers=args.threads)
    table, fit = _fit_run(spec, summary)
    artifact = {
        "spec": spec.to_json(),
        "summary": summary.to_json(),
        "fit": fit.to_json() if fit else None,
        "oracle": _oracle_record(spec),
        "tool_version": __version__,
        "wall_time_seconds": time.perf_counter() - t0,
    }
    (args.out / "run.json").write_text(_dump(artifact))
    if fit is not None:
        table.to_csv(args.out / "ecdf_diff.csv")
        emit_fig1(args.out / "fig1.csv", table, fit)
    s = artifact["summary"]
    print(f"count={s['count']} variance={s['variance']} excess_kurtosis={s['excess_kurtosis']}")
    if fit is not None:
        print(f"alpha={fit.alpha:.6g} c4_std={fit.c4_std:.6g} correlation={fit.correlation:.4f}")
    return 0


def cmd_sweep(args) -> int:
    widths = _parse_widths(args.widths)
    base = spec_from_args(args)
    if not widths:
        print("no fit points", file=sys.stderr)
        return 1
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rows, fits = [], []
    for n in widths:
        net = NetworkConfig(n, base.network.activation, base.network.init_hidden, base.network.init_output)
        spec = EnsembleSpec(net, base.x, base.n_samples, base.seed)
        summary = run_ensemble(spec, workers=args.threads)
        _, fit = _fit_run(spec, summary)
        if fit is None:
            continue
        pred = _oracle_record(spec)
        rows.append((n, fit.alpha, pred["alpha_pred"] if pred else math.nan))
        record = fit.to_json()
        record["excess_kurtosis"] = summary.to_json()["excess_kurtosis"]
        fits.append(record)
        log.info("width %d: alpha=%.4g", n, fit.alpha)
    if not rows:
        print("no fit points", file=sys.stderr)
        return 1
    emit_fig2(args.out / "fig2.csv", rows)
    power = fit_power_law([(n, a) for n, a, _ in rows])
    doc = {
        "spec": base.to_json(),
        "widths": args.widths,
        "fits": fits,
        "power_law": power.to_json(),
        "tool_version": __version__,
        "wall_time_seconds": time.perf_counter() - t0,
    }
    (args.out / "sweep.json").write_text(_dump(doc))
    print(f"exponent={power.exponent:.4f} r_squared={power.r_squared:.4f} points={len(rows)}")
    return 0


def cmd_predict(args) -> int:
    spec = spec_from_args(args)
    sys.stdout.write(_dump(predict(spec.network, spec.x)))
    return 0


def cmd_rg(args) -> int:
    if not 1e-5 <= args.epsilon <= 1e-2:
        raise UsageError("--epsilon must lie in [1e-5, 1e-2]")
    if args.points < 1024 or args.points & (args.points - 1):
        raise UsageError("--points must be a power of two >= 1024")
    rows = eigenvalue_table(range(7), args.epsilon, args.points, args.hi)
    fixed = iterate_to_fixed_point(GriddedDensity.gaussian(n_points=args.points, hi=args.hi), 1)[-1]
    log.info("fixed point: sup |R[phi] - phi| = %.3e", fixed)
    args.out.mkdir(parents=True, exist_ok=True)
    lines = ["n,lambda_measured,lambda_expected,abs_error"]
    lines += [f"{n},{lam!r},{exp!r},{err!r}" for n, lam, exp, err in rows]
    text = "\n".join(lines) + "\n"
    (args.out / "rg.csv").write_text(text)
    sys.stdout.write(text)
    return 0


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "predict": cmd_predict, "rg": cmd_rg}


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise UsageError("--threads must be >= 1")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        if "usage:" not in str(exc):
            parser.print_usage(sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except RUNTIME_ERRORS as exc:
        print(f"finitewidth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    sys.exit(run_cli())
