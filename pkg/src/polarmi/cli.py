"""Command-line front end: ``polarmi {gaussian,constellation,shaping-gain,export-constellation,selftest}``."""

import argparse
import sys

import numpy as np

from . import __version__
from .numerics import EstimatorConfig
from .sweep import SweepError, SweepSpec, make_constellation, run_sweep, shaping_gain, to_csv, to_json


def _add_config_flags(p):
    p.add_argument("--samples", type=int, default=200_000, help="Monte-Carlo draws per symbol (mode mc)")
    p.add_argument("--gh-nodes", type=int, default=32, help="Gauss-Hermite nodes per dimension (mode gh)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("gh", "mc"), default="gh")
    p.add_argument("--quad-tol", type=float, default=1e-8, help="absolute tolerance of the outer quadrature")


def _add_sweep_flags(p):
    p.add_argument("--snr-start", type=float, default=-10.0, help="first SNR in dB")
    p.add_argument("--snr-stop", type=float, default=20.0, help="last SNR in dB (inclusive)")
    p.add_argument("--snr-step", type=float, default=1.0, help="grid step in dB")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file; stdout if omitted")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    _add_config_flags(p)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="polarmi",
        description="Amplitude, phase and cross terms of mutual information over complex AWGN.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gaussian", help="sweep the decomposition for Gaussian input")
    _add_sweep_flags(p)

    p = sub.add_parser("constellation", help="sweep a finite constellation")
    p.add_argument("--kind", choices=("product_apsk", "square_qam", "psk"), default="product_apsk")
    p.add_argument("--order", type=int, required=True, help="bits per symbol m (2**m points)")
    _add_sweep_flags(p)

    p = sub.add_parser("shaping-gain", help="SNR advantage of product-APSK over square QAM")
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--target", type=float, required=True, help="target rate in bits per symbol")
    _add_config_flags(p)

    p = sub.add_parser("export-constellation", help="write constellation points as CSV")
    p.add_argument("--kind", choices=("product_apsk", "square_qam", "psk"), default="product_apsk")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--out", required=True)

    sub.add_parser("selftest", help="run a quick invariant battery")
    return parser


def _config(args):
    return EstimatorConfig(mc_samples=args.samples, gh_nodes=args.gh_nodes,
                           quad_tol=args.quad_tol, seed=args.seed, mode=args.mode)


def _sweep(args, kind, order):
    spec = SweepSpec(input_kind=kind, order=order, snr_start_db=args.snr_start,
                     snr_stop_db=args.snr_stop, snr_step_db=args.snr_step,
                     config=_config(args), output_format=args.format,
                     output_path=args.out, workers=args.workers)
    result = run_sweep(spec)
    if args.out is None:
        sys.stdout.write(to_csv(result) if args.format == "csv" else to_json(result))
    else:
        print(f"wrote {len(result.records)} rows to {args.out}", file=sys.stderr)


def _selftest():
    from . import discrete_polar as dp
    from . import gaussian_polar as gp
    from .constellation import make_product_apsk, validate
    from .distributions import ChannelParams
    from .special_math import f_lambda

    checks = []
    checks.append(("bound constant", abs(gp.BOUND_CONST + 0.6879) < 5e-4))
    lam = np.logspace(-3, 4, 200)
    f = f_lambda(lam)
    checks.append(("f in (0, 1/2)", bool(np.all((f > 0) & (f < 0.5)))))
    params = ChannelParams.from_snr_db(10.0)
    d = gp.decompose_gaussian(params)
    checks.append(("gaussian bounds", d.amplitude.value >= gp.amp_lower_bound(params)
                   and d.phase.value <= gp.phase_upper_bound(params)))
    c = make_product_apsk(6)
    checks.append(("64APSK valid", validate(c).ok))
    dd = dp.decompose_discrete(c, c.snr_to_n0(10.0))
    checks.append(("64APSK closure", abs(dd.closure_gap) < 0.01))
    checks.append(("64APSK terms in range", 0 <= dd.amplitude.value <= 2 and 0 <= dd.phase.value <= 4))
    ok = True
    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok = ok and passed
    return 0 if ok else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gaussian":
            _sweep(args, "gaussian", None)
        elif args.command == "constellation":
            _sweep(args, args.kind, args.order)
        elif args.command == "shaping-gain":
            gain = shaping_gain(args.order, args.target, _config(args))
            print(f"{gain:.6g}")
        elif args.command == "export-constellation":
            make_constellation(args.kind, args.order).to_csv(args.out)
        elif args.command == "selftest":
            return _selftest()
    except ValueError as exc:
        parser.error(str(exc))
    except (SweepError, OSError) as exc:
        print(f"polarmi: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
