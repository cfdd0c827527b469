"""Command-line front end.

Every subcommand writes one CSV or JSON artifact to stdout or ``--out``.
Exit codes: 0 ok, 2 usage, 3 numerical diagnostic, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile

import numpy as np

from .coherence import coherence_trace
from .experiment import (NoiseModel, extract_degenerate_zero, extract_zeros,
                         synthesize_measurement, preset_noise, zero_uncertainty)
from .ising import J_TMP, LAMBDA_TMP, IsingParams, build_polynomial
from .thermo import (edge_scan, free_energy_direct, free_energy_from_zeros,
                     free_energy_saddle)
from .zeros import (ConvergenceError, ZeroCountError, ZeroSet, find_zeros_polynomial,
                    find_zeros_real)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return np.linspace(float(start), float(stop), int(count))
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None


def _params(args, beta_j=None) -> IsingParams:
    lam = args.lambda_ if args.lambda_hz is None else 2 * math.pi * args.lambda_hz
    bj = args.beta_j if beta_j is None else beta_j
    if bj < 0:
        raise UsageError("--beta-j must be >= 0")
    beta = bj / args.coupling
    return IsingParams(args.n, args.coupling, getattr(args, "h", 0.0), beta, lam)


def write_output(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".leeyang-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def cmd_zeros(args) -> str:
    params = _params(args)
    if args.method == "polynomial" or (args.method == "auto" and params.field != 0):
        zeros = find_zeros_polynomial(build_polynomial(params))
    else:
        zeros = find_zeros_real(params)
    if args.eta is not None:
        zeros = zero_uncertainty(params, zeros, args.eta)
    return zeros.to_csv() if args.format == "csv" else _dump(zeros.to_dict())


def cmd_coherence(args) -> str:
    params = _params(args)
    trace = coherence_trace(params, args.t_start, args.t_end, args.samples)
    return trace.to_csv() if args.format == "csv" else _dump(trace.to_dict())


def cmd_free_energy(args) -> str:
    grid = parse_grid(args.beta_j_grid)
    sources = ["direct", "from_zeros"] if args.source == "both" else [args.source]
    results = []
    for bj in grid:
        params = _params(args, beta_j=float(bj))
        for source in sources:
            if source == "direct":
                results.append(free_energy_direct(params))
            elif source == "from_zeros":
                results.append(free_energy_from_zeros(find_zeros_real(params)))
            else:
                results.append(free_energy_saddle(params))
    if args.format == "json":
        return _dump([r.to_dict() for r in results])
    lines = ["beta,logZ,F,F_per_spin,source"]
    for r in results:
        lines.append(",".join([repr(r.beta), repr(r.log_partition), repr(r.free_energy),
                               repr(r.per_spin), r.source]))
    return "\n".join(lines) + "\n"


def cmd_edge_scan(args) -> str:
    t_grid = parse_grid(args.t_grid)
    temps = t_grid * args.n * args.coupling
    curve = edge_scan(args.n, args.coupling, temps, workers=args.threads)
    tc = curve.estimated_tc
    est = "none" if tc is None else repr(tc / (args.n * args.coupling))
    print(f"estimated_tc_over_NJ={est} analytic_tc_over_NJ=0.25", file=sys.stderr)
    return curve.to_csv() if args.format == "csv" else _dump(curve.to_dict())


def _load_noise(args) -> NoiseModel:
    if args.noise_file and args.noise_preset:
        raise UsageError("use either --noise-file or --noise-preset")
    if args.noise_file:
        try:
            with open(args.noise_file) as fh:
                noise = NoiseModel.from_json(fh.read())
        except OSError:
            raise
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"invalid noise file {args.noise_file}: {exc}") from None
    elif args.noise_preset:
        noise = preset_noise(args.noise_preset)
    else:
        noise = NoiseModel()
    if args.seed is not None:
        noise.seed = args.seed
    return noise


def cmd_simulate(args) -> str:
    params = _params(args)
    noise = _load_noise(args)
    t = np.linspace(0.0, 2 * math.pi / params.probe_coupling, args.samples)
    trace = synthesize_measurement(params, noise, t)
    zeros = extract_zeros(trace)
    degenerate = False
    if not zeros.is_complete:
        mid = extract_degenerate_zero(trace, max(noise.eta, args.threshold))
        if mid is None:
            raise ZeroCountError(
                f"extracted {zeros.total} of {params.n_spins} zeros and no "
                "sub-threshold region", zeros)
        zeros = ZeroSet([mid], [params.n_spins], params)
        degenerate = True
    zeros = zero_uncertainty(params, zeros, noise.eta)
    if args.trace_out:
        write_output(trace.to_csv(), args.trace_out)
    if args.format == "csv":
        return zeros.to_csv()
    return _dump({"zeros": zeros.to_dict(), "degenerate": degenerate, "trace": trace.to_dict()})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leeyang", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, field=True):
        p.add_argument("--n", type=int, required=True, help="number of bath spins N")
        p.add_argument("--coupling", type=float, default=J_TMP,
                       help="J in rad/s (default 2 pi x 16.75)")
        lam = p.add_mutually_exclusive_group()
        lam.add_argument("--lambda", dest="lambda_", type=float, default=LAMBDA_TMP,
                         help="probe coupling in rad/s (default 2 pi x 10.57)")
        lam.add_argument("--lambda-hz", type=float, default=None,
                         help="probe coupling in Hz (multiplied by 2 pi)")
        if field:
            p.add_argument("--h", type=float, default=0.0, help="field h, same units as --coupling")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("zeros", help="Lee-Yang zeros at one temperature")
    common(p)
    p.add_argument("--beta-j", type=float, required=True)
    p.add_argument("--method", choices=("auto", "real", "polynomial"), default="auto")
    p.add_argument("--eta", type=float, default=None,
                   help="coherence noise; fills delta_theta = eta/|dL/dtheta|")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("coherence", help="probe coherence L(t) over a time window")
    common(p)
    p.add_argument("--beta-j", type=float, required=True)
    p.add_argument("--samples", type=int, default=2049)
    p.add_argument("--t-start", type=float, default=0.0)
    p.add_argument("--t-end", type=float, default=None, help="default: one period 2 pi/lambda")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("free-energy", help="free energy over a beta*J grid")
    common(p, field=False)
    p.add_argument("--beta-j-grid", required=True, help="start:stop:count or a,b,c")
    p.add_argument("--source", choices=("direct", "from_zeros", "saddle_large_n", "both"),
                   default="both")
    p.set_defaults(func=cmd_free_energy)

    p = sub.add_parser("edge-scan", help="first zero theta_1 against T/(NJ)")
    common(p, field=False)
    p.add_argument("--t-grid", default="0.02:0.6:59", help="T/(NJ) values, start:stop:count")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker processes")
    p.set_defaults(func=cmd_edge_scan)

    p = sub.add_parser("simulate", help="synthetic noisy measurement and zero extraction")
    common(p, field=False)
    p.add_argument("--beta-j", type=float, required=True)
    p.add_argument("--noise-file", default=None, help="noise model JSON")
    p.add_argument("--noise-preset", choices=("inf", "15J/8", "9J/40"), default=None,
                   help="use a bundled preparation-noise preset (temperature label)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=2049)
    p.add_argument("--threshold", type=float, default=5e-4,
                   help="minimum |L| threshold for a degenerate zero region")
    p.add_argument("--trace-out", default=None, help="also write the trace CSV here")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        text = args.func(args)
        write_output(text, args.out)
    except (UsageError, ValueError) as exc:
        print(f"leeyang: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ZeroCountError, ConvergenceError) as exc:
        print(f"leeyang: numerical diagnostic: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"leeyang: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK
