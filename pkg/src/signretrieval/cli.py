"""Command-line interface.

Exit codes: 0 success, 1 failed check (``oracle-check``), 2 malformed input
or invalid argument, 3 numerically inconsistent measurements.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io as sio
from ._validation import InconsistentMeasurementsError
from .applications import AUTO, separated_objects_recover, vpr3_recover
from .oracle import check_instance
from .simulation import (
    MonteCarloConfig,
    NoiseConfig,
    aggregate,
    aggregate_csv,
    apply_noise,
    gen_complex_signal,
    gen_real_spectrum_signal,
    gen_separated_pair,
    monte_carlo,
    reports_jsonl,
    trial_seed,
)
from .solver import retrieve_sign
from .spectral import dft, idft, sign_of_real_spectrum
from .support import estimate_support

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_INCONSISTENT = 0, 1, 2, 3

logger = logging.getLogger("signretrieval")


def _tau_or_auto(text):
    if text == AUTO:
        return AUTO
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an even integer or 'auto', got {text!r}") from None


def _sibling(path, suffix):
    stem, _ = os.path.splitext(path)
    return stem + suffix


def cmd_sign(args):
    intensities = sio.read_real_vector(args.input)
    signs, diag = retrieve_sign(intensities, args.tau, args.sigma)
    fhat = dft(np.sqrt(np.clip(intensities, 0, None)) * signs)
    fhat_path = args.fhat or _sibling(args.out, "_fhat.csv")
    sio.write_text(args.out, sio.dumps({
        "n": int(intensities.shape[0]),
        "tau": args.tau,
        "sigma": args.sigma,
        "signs": [int(s) for s in signs],
        "diagnostics": diag.to_dict(),
    }))
    sio.write_text(fhat_path, sio.format_complex_csv(fhat))
    return {"out": args.out, "fhat": fhat_path, "diagnostics": diag.to_dict()}


def cmd_estimate_tau(args):
    intensities = sio.read_real_vector(args.input)
    tau_hat, curve = estimate_support(intensities, args.tau_min, args.tau_max, args.sigma, args.threads)
    sio.write_text(args.out, sio.format_curve_csv(curve))
    return {"tau_hat": tau_hat, "curve": args.out}


def cmd_vpr3(args):
    i1 = sio.read_real_vector(args.i1)
    i2 = sio.read_real_vector(args.i2)
    s = sio.read_real_vector(args.sum)
    res = vpr3_recover(i1, i2, s, args.tau, args.tau_interference, args.sigma)
    sio.write_text(args.out1, sio.format_complex_csv(res.f1))
    sio.write_text(args.out2, sio.format_complex_csv(res.f2))
    data = {"f1": args.out1, "f2": args.out2, "tau_interference": res.tau_interference,
            "residual": res.residual}
    if args.curve and res.curve:
        sio.write_text(args.curve, sio.format_curve_csv(res.curve))
        data["curve"] = args.curve
    return data


def cmd_separated(args):
    intensity = sio.read_real_vector(args.input)
    layout = sio.read_layout(args.layout)
    res = separated_objects_recover(intensity, layout, args.tau_difference, args.sigma)
    sio.write_text(args.out, sio.format_complex_csv(res.f))
    return {"fhat": args.out, "tau_difference": res.tau_difference, "residual": res.residual}


def cmd_montecarlo(args):
    raw = sio.read_json(args.config)
    if not isinstance(raw, dict):
        raise sio.FormatError(f"{args.config}: config must be a JSON object")
    if args.seed is not None:
        raw = {**raw, "seed": args.seed}
    try:
        config = MonteCarloConfig.from_dict(raw)
    except TypeError as exc:
        raise sio.FormatError(f"{args.config}: {exc}") from None
    reports = monte_carlo(config, threads=args.threads)
    sio.write_text(args.out, aggregate_csv(reports))
    sio.write_text(args.jsonl, reports_jsonl(reports))
    return {"aggregate": args.out, "trials": args.jsonl, "rows": aggregate(reports)}


def cmd_oracle_check(args):
    if args.trials < 1:
        raise ValueError("trials must be at least 1")
    seed = 0 if args.seed is None else args.seed
    reports = []
    for t in range(args.trials):
        _, F = gen_real_spectrum_signal(args.n, args.tau, trial_seed(seed, 0, t))
        reports.append(check_instance(F, args.tau))
    failed = [i for i, r in enumerate(reports) if not r.ok]
    if args.out:
        sio.write_text(args.out, "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports))
    data = {
        "trials": args.trials,
        "failed": failed,
        "solver_checked": sum(r.solver_checked for r in reports),
        "rank_checked": sum(r.rank_checked for r in reports),
    }
    return data, (EXIT_CHECK_FAILED if failed else EXIT_OK)


def cmd_generate(args):
    seed = 0 if args.seed is None else args.seed
    os.makedirs(args.dir, exist_ok=True)
    noise = np.random.SeedSequence([seed, 1]).generate_state(3)
    written = []

    def put(name, text):
        target = os.path.join(args.dir, name)
        sio.write_text(target, text)
        written.append(target)

    if args.kind == "sign":
        f, F = gen_real_spectrum_signal(args.n, args.tau, seed)
        put("intensities.csv", sio.format_real_csv(apply_noise(F, NoiseConfig(args.sigma, int(noise[0])))))
        put("signal.csv", sio.format_complex_csv(f))
        put("signs.csv", sio.format_real_csv(sign_of_real_spectrum(F), header="sign"))
    elif args.kind == "vpr3":
        s1, s2 = np.random.SeedSequence(seed).generate_state(2)
        f1 = gen_complex_signal(args.n, args.tau, int(s1))
        f2 = gen_complex_signal(args.n, args.tau, int(s2))
        F1, F2 = idft(f1), idft(f2)
        put("i1.csv", sio.format_real_csv(apply_noise(F1, NoiseConfig(args.sigma, int(noise[0])))))
        put("i2.csv", sio.format_real_csv(apply_noise(F2, NoiseConfig(args.sigma, int(noise[1])))))
        put("sum.csv", sio.format_real_csv(apply_noise(F1 + F2, NoiseConfig(args.sigma, int(noise[2])))))
        put("f1.csv", sio.format_complex_csv(f1))
        put("f2.csv", sio.format_complex_csv(f2))
    else:
        f, _, _, layout = gen_separated_pair(args.n, args.len1, args.gap, args.len2, seed)
        put("intensity.csv", sio.format_real_csv(apply_noise(idft(f), NoiseConfig(args.sigma, int(noise[0])))))
        put("layout.json", sio.dumps(layout.to_dict()))
        put("signal.csv", sio.format_complex_csv(f))
    return {"files": written}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON envelope on stdout")
    common.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="signretrieval", description="Sign and phase retrieval under compact support.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("sign", parents=[common], help="retrieve the sign of a real spectrum")
    p.add_argument("--input", required=True, help="intensities |F|^2 (CSV)")
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out", default="result.json")
    p.add_argument("--fhat", default=None, help="reconstruction CSV (default <out>_fhat.csv)")
    p.set_defaults(func=cmd_sign)

    p = sub.add_parser("estimate-tau", parents=[common], help="scan the support parameter")
    p.add_argument("--input", required=True)
    p.add_argument("--tau-min", type=int, required=True)
    p.add_argument("--tau-max", type=int, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out", default="curve.csv")
    p.set_defaults(func=cmd_estimate_tau)

    p = sub.add_parser("vpr3", parents=[common], help="two signals from three intensities")
    p.add_argument("--i1", required=True)
    p.add_argument("--i2", required=True)
    p.add_argument("--sum", required=True)
    p.add_argument("--tau", type=int, required=True, help="support parameter of f1 and f2")
    p.add_argument("--tau-interference", type=_tau_or_auto, default=AUTO)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out1", default="f1.csv")
    p.add_argument("--out2", default="f2.csv")
    p.add_argument("--curve", default=None, help="write the interference support scan here")
    p.set_defaults(func=cmd_vpr3)

    p = sub.add_parser("separated", parents=[common], help="two separated objects from one intensity")
    p.add_argument("--input", required=True)
    p.add_argument("--layout", required=True, help='JSON {"len1", "gap", "len2", "offset"}')
    p.add_argument("--tau-difference", type=_tau_or_auto, default=None)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out", default="fhat.csv")
    p.set_defaults(func=cmd_separated)

    p = sub.add_parser("montecarlo", parents=[common], help="noise sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="aggregate.csv")
    p.add_argument("--jsonl", default="trials.jsonl")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("oracle-check", parents=[common], help="brute-force cross-check at small N")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--out", default=None, help="per-instance JSON lines")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("generate", parents=[common], help="write a synthetic noise-free or noisy instance")
    p.add_argument("--kind", choices=("sign", "vpr3", "separated"), default="sign")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=int, default=0)
    p.add_argument("--len1", type=int, default=None)
    p.add_argument("--gap", type=int, default=None)
    p.add_argument("--len2", type=int, default=None)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--dir", default=".")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.cmd == "generate" and args.kind == "separated" and None in (args.len1, args.gap, args.len2):
        parser.error("generate --kind separated needs --len1, --gap and --len2")
    if args.threads < 1:
        parser.error("--threads must be at least 1")

    code = EXIT_OK
    try:
        out = args.func(args)
        data, code = out if isinstance(out, tuple) else (out, EXIT_OK)
    except InconsistentMeasurementsError as exc:
        data, code = {"error": str(exc)}, EXIT_INCONSISTENT
    except (sio.FormatError, ValueError) as exc:
        data, code = {"error": str(exc)}, EXIT_INVALID
    if "error" in data:
        print(f"signretrieval {args.cmd}: {data['error']}", file=sys.stderr)

    if args.json:
        print(json.dumps({"cmd": args.cmd, "ok": code == EXIT_OK, "data": data}, sort_keys=True))
    elif "error" not in data:
        for key, value in data.items():
            print(f"{key}: {value}")
    return code


if __name__ == "__main__":
    sys.exit(main())
