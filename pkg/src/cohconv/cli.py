"""Command-line front end.

Exit codes: 0 success / convertible / verified, 1 negative answer, 2 error.
Inputs are file paths, "-" for stdin, or inline JSON starting with "{".
"""

import argparse
import json
import sys

import numpy as np

from . import jsonio
from .convertibility import DEFAULT_TOL, can_convert
from .feasibility import DEFAULT_FEAS_TOL
from .measures import MeasureId, ensemble_coherence, measure_grid, pure_coherence
from .oracle import fuzz_theorem2, verify_transformation
from .states import (
    TAU_COMPLETE,
    Ensemble,
    PureState,
    completeness_residual,
    incoherence_violations,
)
from .synthesis import NotConvertibleError, synthesize_ensemble_map, synthesize_pure_ensemble


class UsageError(Exception):
    pass


def _load(arg):
    try:
        if arg == "-":
            text = sys.stdin.read()
        elif arg.lstrip().startswith("{"):
            text = arg
        else:
            with open(arg) as fh:
                text = fh.read()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {arg!r}: {exc}") from exc


def _as_ensemble(obj):
    return Ensemble.singleton(obj) if isinstance(obj, PureState) else obj


def _emit(args, payload):
    text = jsonio.dumps(payload)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_measure(args):
    obj = jsonio.state_or_ensemble_from_json(_load(args.input))
    value = pure_coherence if isinstance(obj, PureState) else ensemble_coherence
    if args.measure or args.kind:
        if args.measure:
            m = MeasureId.from_json(_load(args.measure))
        else:
            if args.l is None:
                raise UsageError("--kind needs --l")
            m = MeasureId(args.kind, args.l, args.k)
        if m.l > obj.dim:
            raise UsageError(f"l={m.l} exceeds dimension {obj.dim}")
        _emit(args, {"value": value(obj, m)})
        return 0
    table = [{**m.to_json(), "value": value(obj, m)} for m in measure_grid(obj.dim)]
    _emit(args, {"measures": table})
    return 0


def cmd_check(args):
    src = jsonio.state_or_ensemble_from_json(_load(args.source))
    tgt = jsonio.state_or_ensemble_from_json(_load(args.target))
    verdict = can_convert(src, tgt, args.tol)
    _emit(args, verdict.to_json())
    return 0 if verdict.convertible else 1


def cmd_synthesize(args):
    src = jsonio.state_or_ensemble_from_json(_load(args.source))
    tgt = _as_ensemble(jsonio.state_or_ensemble_from_json(_load(args.target)))
    if src.dim != tgt.dim:
        raise UsageError(f"dimensions differ: {src.dim} vs {tgt.dim}")
    try:
        if isinstance(src, PureState):
            channel = synthesize_pure_ensemble(src, tgt, args.tol)
            checks = [(channel, src, tgt)]
            payload = jsonio.channel_to_json(channel)
        else:
            plan = synthesize_ensemble_map(src, tgt, args.tol, args.feas_tol)
            checks = list(zip(plan.per_source_channels, src.states, plan.conditionals))
            payload = jsonio.plan_to_json(plan)
    except NotConvertibleError as exc:
        verdict = exc.verdict if exc.verdict is not None else can_convert(src, tgt, args.tol)
        _emit(args, {"error": str(exc), **verdict.to_json()})
        return 1

    w_err = s_err = 0.0
    ok = True
    for channel, state, expected in checks:
        rep = verify_transformation(channel, state, expected, args.verify_tol)
        ok &= rep.passed and completeness_residual(channel.kraus) <= TAU_COMPLETE
        ok &= not incoherence_violations(channel.kraus)
        w_err, s_err = max(w_err, rep.max_weight_err), max(s_err, rep.max_state_err)
    if not isinstance(src, PureState):
        # mixture identity: sum_j p_j t_ji == q_i
        mix_err = float(np.abs(src.weights @ plan.transition.t - tgt.weights).max())
        w_err = max(w_err, mix_err)
        ok &= mix_err <= args.verify_tol
    if not ok:
        print(f"internal verification failed: weight err {w_err:.3g}, state err {s_err:.3g}", file=sys.stderr)
        return 2
    payload.update({"verified": True, "max_weight_err": w_err, "max_state_err": s_err})
    _emit(args, payload)
    return 0


def cmd_verify(args):
    kraus = jsonio.kraus_from_json(_load(args.channel))
    state = jsonio.state_or_ensemble_from_json(_load(args.input))
    if not isinstance(state, PureState):
        raise UsageError("verify input must be a pure state")
    expected = _as_ensemble(jsonio.state_or_ensemble_from_json(_load(args.expected)))
    if state.dim != kraus[0].shape[0] or expected.dim != state.dim:
        raise UsageError("channel, input and expected must share one dimension")
    residual = completeness_residual(kraus)
    bad = incoherence_violations(kraus)
    rep = verify_transformation(kraus, state, expected, args.verify_tol)
    passed = rep.passed and residual <= TAU_COMPLETE and not bad
    out = rep.to_json()
    out.update({"pass": passed, "completeness_residual": residual, "non_incoherent_operators": bad})
    _emit(args, out)
    return 0 if passed else 1


def cmd_fuzz(args):
    if min(args.d, args.m, args.n, args.trials) < 1:
        raise UsageError("d, m, n and trials must be positive")
    rep = fuzz_theorem2(args.d, args.m, args.n, args.trials, args.seed, args.tol, args.feas_tol, args.jobs, args.grid)
    _emit(args, rep.to_json())
    return 1 if rep.failing or rep.grid_disagreements else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="cohconv", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="decision tolerance")
    common.add_argument("--feas-tol", type=float, default=DEFAULT_FEAS_TOL, help="LP feasibility tolerance")
    common.add_argument("--verify-tol", type=float, default=1e-8, help="synthesis verification tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=int, default=1000, help="oracle k-grid size")
    common.add_argument("--jobs", type=int, default=1, help="parallel fuzz workers")
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", parents=[common], help="coherence values of a state or ensemble")
    p.add_argument("input")
    p.add_argument("--measure", help='measure JSON, e.g. {"kind": "capped", "l": 2, "k": 0.25}')
    p.add_argument("--kind", choices=["tail", "capped"])
    p.add_argument("--l", type=int)
    p.add_argument("--k", type=float)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("check", parents=[common], help="decide convertibility")
    p.add_argument("source")
    p.add_argument("target")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synthesize", parents=[common], help="build and verify a converting channel")
    p.add_argument("source")
    p.add_argument("target")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", parents=[common], help="check a channel against an expected ensemble")
    p.add_argument("channel")
    p.add_argument("input")
    p.add_argument("expected")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fuzz", parents=[common], help="decision vs transition-LP fuzzing")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (UsageError, ValueError, KeyError, TypeError) as exc:
        print(f"cohconv {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
