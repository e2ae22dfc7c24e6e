"""``petz`` command-line interface.

Exit codes: 0 success, 1 failed invariant or computation error, 2 bad
configuration.
"""
from __future__ import annotations

import argparse
import ast
import json
import math
import operator
import sys

from .channels import make_channel
from .errors import ConfigError, PetzError
from .petz import BlochState, build_petz
from .sweeps import SweepConfig, prior_sweep, threshold_sweep
from .synth import rewrite_cnot_to_gpg, synthesize
from .dilation import dilate_general, dilate_rank2_analytic

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def number(text: str) -> float:
    """Float or a small arithmetic expression in ``pi`` such as ``3*pi/4``."""
    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(text)

    try:
        return ev(ast.parse(text, mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- build ------------------------------------------------------------------------


def cmd_build(args) -> int:
    try:
        ch = make_channel(args.channel, args.p)
        gamma = BlochState(*args.gamma)
    except (PetzError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    pm = build_petz(ch, gamma)
    if args.emit == "kraus":
        _write(pm.to_json() + "\n", args.out)
        return EXIT_OK
    if args.method == "analytic" or (args.method == "auto" and len(pm.all_kraus) == 2):
        d = dilate_rank2_analytic(pm)
    else:
        d = dilate_general(pm)
    if args.emit == "unitary":
        _write(d.to_json() + "\n" if args.format == "json" else d.to_text(), args.out)
        return EXIT_OK
    gs = synthesize(d.U)
    if args.emit == "gpg-circuit":
        gs = rewrite_cnot_to_gpg(gs, merge=True)
    _write(gs.to_text(), args.out)
    return EXIT_OK


# -- sweeps -----------------------------------------------------------------------

_SWEEP_FLAGS = {
    "channel": "channel", "p": "p", "gamma0": "gamma", "dR": "dR", "dtheta": "dtheta",
    "dphi": "dphi", "level": "level", "deltas": "deltas", "n": "n", "seed": "seed",
    "mode": "mode", "workers": "workers", "noise_mode": "noise_mode",
    "rotation_offset": "rotation_offset", "output": "out",
}


def _sweep_config(args) -> SweepConfig:
    cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    for key, flag in _SWEEP_FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            cfg[key] = val
    return SweepConfig.from_dict(cfg)


def cmd_sweep_prior(args) -> int:
    cfg = _sweep_config(args)
    res = prior_sweep(cfg)
    _write(res.to_csv(), cfg.output)
    if args.contour_out:
        _write(res.contour_csv(), args.contour_out)
    summary = {"area": res.area, "clipped": res.clipped, "origin_deltaF": res.origin_value}
    print(json.dumps(summary), file=sys.stderr if cfg.output in (None, "-") else sys.stdout)
    return EXIT_OK


def cmd_sweep_threshold(args) -> int:
    cfg = _sweep_config(args)
    res = threshold_sweep(cfg)
    _write(res.to_csv(), cfg.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_verify

    results = run_verify(args.inject)
    report = {"passed": all(r.passed for r in results), "suites": [r.to_dict() for r in results]}
    print(json.dumps(report, indent=2 if args.pretty else None))
    return EXIT_OK if report["passed"] else EXIT_FAIL


# -- parser -----------------------------------------------------------------------


def _add_sweep_flags(sp, threshold: bool) -> None:
    sp.add_argument("--config", help="JSON file with SweepConfig fields; flags override it")
    sp.add_argument("--channel", choices=["dephasing", "amplitude_damping", "depolarizing"])
    sp.add_argument("--p", type=number)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--out", help="output CSV (default stdout)")
    if threshold:
        sp.add_argument("--deltas", type=number, nargs="+")
        sp.add_argument("--n", type=int)
        sp.add_argument("--mode", choices=["ball", "surface"])
        sp.add_argument("--noise-mode", dest="noise_mode", choices=["combined", "exact_product"])
        sp.add_argument("--rotation-offset", dest="rotation_offset", type=number)
    else:
        sp.add_argument("--gamma", type=number, nargs=3, metavar=("R", "THETA", "PHI"))
        sp.add_argument("--dR", type=number)
        sp.add_argument("--dtheta", type=number, nargs=3, metavar=("MIN", "MAX", "STEPS"))
        sp.add_argument("--dphi", type=number, nargs=3, metavar=("MIN", "MAX", "STEPS"))
        sp.add_argument("--level", type=number)
        sp.add_argument("--contour-out", dest="contour_out", help="write the origin contour polyline here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="petz", description="Petz recovery maps, circuits and noise sweeps")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="emit Kraus operators, dilation unitary or circuit")
    b.add_argument("--channel", required=True, choices=["dephasing", "amplitude_damping", "depolarizing"])
    b.add_argument("--p", type=number, required=True)
    b.add_argument("--gamma", type=number, nargs=3, required=True, metavar=("R", "THETA", "PHI"))
    b.add_argument("--emit", choices=["kraus", "unitary", "circuit", "gpg-circuit"], default="circuit")
    b.add_argument("--method", choices=["auto", "analytic", "gram_schmidt"], default="auto")
    b.add_argument("--format", choices=["text", "json"], default="text", help="unitary output format")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("sweep", help="parameter sweeps")
    ssub = s.add_subparsers(dest="sweep", required=True)
    sp = ssub.add_parser("prior", help="recovery error over reference mismatch grid")
    _add_sweep_flags(sp, threshold=False)
    sp.set_defaults(func=cmd_sweep_prior)
    st = ssub.add_parser("threshold", help="recovery error against gate error")
    _add_sweep_flags(st, threshold=True)
    st.set_defaults(func=cmd_sweep_threshold)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--inject", choices=["tp-violation", "small-cutoff"], help="inject a known fault")
    v.add_argument("--pretty", action="store_true")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "dtheta", None) is not None:
        args.dtheta = [args.dtheta[0], args.dtheta[1], int(args.dtheta[2])]
    if getattr(args, "dphi", None) is not None:
        args.dphi = [args.dphi[0], args.dphi[1], int(args.dphi[2])]
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PetzError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
