"""``eodpersist`` command line: analyze, simulate, oracle.

Exit codes: 0 success, 2 usage or input error, 3 no analyzable data,
4 fit degeneracy.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._accel import BACKEND, set_threads
from .exceptions import ConfigError, DomainError, FitError, NoWindowsError, ParseError
from .fitting import bootstrap_slopes, fit_double_power_law
from .ingestion import DEFAULT_COVERAGE, parse_eod_csv, partition_windows
from .market import REFERENCES, average_curves, window_curve
from .synthetic import (SURVIVAL_CAP, WalkConfig, exact_survival, sim_dates, ticker_names,
                        walk_prices)

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_INPUT, EXIT_NODATA, EXIT_FIT = 0, 2, 3, 4
REFERENCE_SLOPE = -1.5  # d = 1 branch of the random-walk reference family

log = logging.getLogger("eodpersist")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# -- analyze ----------------------------------------------------------------

def _parse_scheme(text):
    if text in ("quarterly", "whole"):
        return text
    ranges = []
    for part in text.split(","):
        try:
            lo, hi = part.split(":")
            ranges.append((dt.date.fromisoformat(lo), dt.date.fromisoformat(hi)))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad window range {part!r}; expected YYYY-MM-DD:YYYY-MM-DD") from None
    return ranges


def _parse_fit_range(text):
    lo, _, hi = text.partition(":")
    try:
        return int(lo), (None if hi in ("", "auto") else int(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fit range {text!r}; expected TMIN:TMAX") from None


def _resolve_fit_range(curve, requested):
    lo, hi = requested
    support = len(curve) - 1
    want = support if hi is None else hi
    last = curve.last_positive()
    used = min(want, support, last)
    notes = []
    if want > support:
        notes.append(f"t_max {want} beyond curve support, clipped to {support}")
    if used < min(want, support):
        notes.append(f"t_max truncated to {used}, the last t with R(t) > 0")
    return (lo, used), notes


def _fmt(x):
    return repr(float(x))


def write_curve_csv(path, curves, avg):
    T = len(avg)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "n", "R"] + [f"R_{c.label}" for c in curves])
        for t in range(T):
            w.writerow([t, int(avg.n[t]), _fmt(avg.R[t])] + [_fmt(c.R[t]) for c in curves])


def plot_rows(avg, t_ref, reference="base"):
    """Rows ``(t, ln t, ln R, ln ref, ln survival)`` for every t >= 1 with R > 0.

    The reference line and the exact +/-1 walk survival are shifted to pass
    through the data at ``t_ref``.
    """
    R = avg.R
    anchor = math.log(R[t_ref]) if 0 < t_ref < len(R) and R[t_ref] > 0 else None
    rows = []
    for t in range(1, len(R)):
        if R[t] <= 0:
            continue
        lt, lr = math.log(t), float(np.log(R[t]))
        ref = surv = float("nan")
        if anchor is not None:
            ref = anchor + REFERENCE_SLOPE * (lt - math.log(t_ref))
            if t <= SURVIVAL_CAP and t_ref <= SURVIVAL_CAP:
                surv = (anchor + math.log(exact_survival(t, reference=reference))
                        - math.log(exact_survival(t_ref, reference=reference)))
        rows.append((t, lt, lr, ref, surv))
    return rows


def write_plot_dat(path, avg, t_ref, reference="base"):
    with open(path, "w") as fh:
        fh.write("# log-log persistence data, natural logarithms\n")
        fh.write(f"# reference line slope {REFERENCE_SLOPE} and exact +/-1 walk survival, "
                 f"both matched to the data at t = {t_ref}\n")
        fh.write("# t ln_t ln_R ln_ref_d1 ln_rw_survival\n")
        for t, lt, lr, ref, surv in plot_rows(avg, t_ref, reference):
            fh.write(f"{t} {_fmt(lt)} {_fmt(lr)} {_fmt(ref)} {_fmt(surv)}\n")


def _curve_json(c):
    return {"label": c.label, "N": c.N, "T": len(c), "sample_count": c.sample_count,
            "n": [str(int(v)) for v in c.n], "R": [float(v) for v in c.R]}


def analyze(input_path, output_dir, scheme="quarterly", fit_range=(1, None),
            n_resamples=1000, seed=0, coverage=DEFAULT_COVERAGE, reference="base"):
    """Run the full pipeline and write report.json, curve.csv and plot.dat.

    Returns ``(report, exit_code)``. Input errors raise :class:`CliError`.
    """
    path = Path(input_path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read input {input_path}: {exc.strerror}", EXIT_INPUT) from None
    try:
        dataset = parse_eod_csv(data)
    except ParseError as exc:
        raise CliError(f"{input_path}: {exc}", EXIT_INPUT) from None
    try:
        windows = partition_windows(dataset, scheme, coverage)
    except NoWindowsError as exc:
        raise CliError(f"{input_path}: {exc}", EXIT_NODATA) from None

    curves = [window_curve(w, reference) for w in windows]
    avg = average_curves(curves)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_curve_csv(out / "curve.csv", curves, avg)

    used, notes = _resolve_fit_range(avg, fit_range)
    for note in notes:
        log.warning(note)
    write_plot_dat(out / "plot.dat", avg, used[0], reference)

    fit = boot = None
    error = None
    code = EXIT_OK
    try:
        fit = fit_double_power_law(avg, *used)
        if n_resamples:
            boot = bootstrap_slopes(windows, *used, n_resamples=n_resamples, seed=seed,
                                    reference=reference)
    except FitError as exc:
        error = str(exc)
        code = EXIT_FIT

    config = {
        "scheme": scheme if isinstance(scheme, str)
        else [[lo.isoformat(), hi.isoformat()] for lo, hi in scheme],
        "coverage": coverage,
        "reference": reference,
        "fit_range": [fit_range[0], fit_range[1]],
        "n_resamples": n_resamples,
        "seed": seed,
        "backend": BACKEND,
    }
    report = {
        "schema_version": SCHEMA_VERSION,
        "metadata": {
            "tool": "eodpersist",
            "tool_version": __version__,
            "input": {"name": path.name, "sha256": hashlib.sha256(data).hexdigest(),
                      "bytes": len(data), "records": len(dataset)},
            "config": config,
            "seed": seed,
            "timestamp": dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
        },
        "windows": [dict(_curve_json(c), first_date=w.dates[0].isoformat(),
                         last_date=w.dates[-1].isoformat(), dropped=w.dropped)
                    for w, c in zip(windows, curves)],
        "average": _curve_json(avg),
        "fit_range": {"requested": [fit_range[0], fit_range[1]], "used": list(used),
                      "notes": notes},
        "fit": fit.as_dict() if fit else None,
        "fit_error": error,
        "bootstrap": boot.as_dict() if boot else None,
        "reference": {"d": 1, "slope": REFERENCE_SLOPE, "matched_at_t": used[0]},
    }
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report, code


def _cmd_analyze(args):
    set_threads(args.threads)
    report, code = analyze(args.input, args.output_dir, args.scheme, args.fit_range,
                           args.resamples, args.seed, args.coverage, args.reference)
    for w in report["windows"]:
        print(f"window {w['label']}: N={w['N']} T={w['T']}")
    if report["fit"]:
        f = report["fit"]
        print(f"breakpoint t*={f['breakpoint']}  short slope {f['short_segment']['slope']:.4f}"
              f"  long slope {f['long_segment']['slope']:.4f}")
    if report["bootstrap"]:
        for key in ("short_slope", "long_slope"):
            s = report["bootstrap"]["stats"][key]
            if s["mean"] is not None:
                print(f"{key}: {s['mean']:.4f} +/- {s['stderr']:.4f} "
                      f"CI [{s['ci_low']:.4f}, {s['ci_high']:.4f}]")
    if report["fit_error"]:
        print(f"fit failed: {report['fit_error']}", file=sys.stderr)
    return code


# -- simulate -----------------------------------------------------------------

def write_simulated_csv(fh, config: WalkConfig, chunk=2000):
    dates = [d.isoformat() for d in sim_dates(config.n_steps + 1)]
    fh.write("date,ticker,close\n")
    for lo in range(0, config.n_walkers, chunk):
        hi = min(lo + chunk, config.n_walkers)
        prices = walk_prices(config, lo, hi).tolist()
        for tk, row in zip(ticker_names(config.n_walkers, lo, hi), prices):
            fh.write("".join(f"{d},{tk},{p}\n" for d, p in zip(dates, row)))


def _cmd_simulate(args):
    set_threads(args.threads)
    start = args.start if args.start is not None else args.steps + 1000
    try:
        config = WalkConfig(args.walkers, args.steps, args.model, start, args.sigma, args.seed)
    except DomainError as exc:
        raise CliError(f"invalid walk config: {exc}", EXIT_INPUT) from None
    try:
        if args.output in (None, "-"):
            write_simulated_csv(sys.stdout, config)
        else:
            with open(args.output, "w", newline="") as fh:
                write_simulated_csv(fh, config)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    return EXIT_OK


# -- oracle -------------------------------------------------------------------

def _cmd_oracle(args):
    if args.t_max < 0 or args.t_max > args.cap:
        raise CliError(f"t_max {args.t_max} outside 0..{args.cap}", EXIT_INPUT)
    print("t,exact,decimal")
    for t in range(args.t_max + 1):
        p = exact_survival(t, args.cap, args.reference)
        print(f"{t},{p},{float(p)!r}")
    return EXIT_OK


# -- entry point ----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="eodpersist",
        description="Persistence of EOD share prices mapped onto Ising spins.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log window bookkeeping")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="persistence curve, double power-law fit, bootstrap")
    a.add_argument("input", help="CSV with header date,ticker,close (gzip accepted)")
    a.add_argument("-o", "--output-dir", default=".", help="where report.json, curve.csv "
                   "and plot.dat are written (default: current directory)")
    a.add_argument("--scheme", type=_parse_scheme, default="quarterly",
                   help="'quarterly' (default), 'whole', or comma-separated "
                   "YYYY-MM-DD:YYYY-MM-DD ranges")
    a.add_argument("--coverage", type=float, default=DEFAULT_COVERAGE,
                   help="minimum fraction of a window's dates a ticker must be quoted on "
                   "(default: %(default)s)")
    a.add_argument("--fit-range", type=_parse_fit_range, default=(1, None),
                   help="TMIN:TMAX for the double fit; TMAX may be 'auto' (default 1:auto)")
    a.add_argument("--resamples", type=int, default=1000,
                   help="bootstrap resamples, >= 100, or 0 to skip (default: %(default)s)")
    a.add_argument("--seed", type=int, default=0, help="bootstrap seed (default: 0)")
    a.add_argument("--reference", choices=REFERENCES, default="base",
                   help="price later spins are compared with: the day-0 base (default) or "
                   "the day-1 close at spin time 0")
    a.add_argument("--threads", type=int, default=None, help="numba worker threads")
    a.set_defaults(func=_cmd_analyze)

    s = sub.add_parser("simulate", help="write a null-model walk panel as CSV")
    s.add_argument("--model", choices=("pm1", "gauss", "geom"), default="pm1",
                   help="+/-1 steps, Gaussian increments, or Gaussian log-increments")
    s.add_argument("--walkers", type=int, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--start", type=int, default=None,
                   help="start price (default: steps + 1000)")
    s.add_argument("--sigma", type=float, default=1.0, help="increment scale for gauss/geom")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", default=None, help="output CSV (default: stdout)")
    s.add_argument("--threads", type=int, default=None, help="numba worker threads")
    s.set_defaults(func=_cmd_simulate)

    o = sub.add_parser("oracle", help="exact never-flip probabilities of the +/-1 walk")
    o.add_argument("t_max", type=int)
    o.add_argument("--cap", type=int, default=SURVIVAL_CAP, help="table size limit")
    o.add_argument("--reference", choices=REFERENCES, default="base",
                   help="spin reference convention, as for analyze")
    o.set_defaults(func=_cmd_oracle)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "resamples", 0) and args.resamples < 100:
        parser.error("--resamples must be 0 or >= 100")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"eodpersist: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
