"""Command-line entry point: ``collective-lab <command> [options]``.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numeric error.
"""

import argparse
import json
import sys

import numpy as np

from . import estimation as est
from .errors import CollectiveLabError, NoSolution
from .povm import (
    e7_decomposition_check,
    measured_povm_fidelity,
    optimal_povm,
    povm_fidelity,
    symmetric_povm,
    symmetry_kit,
    validate_povm,
)
from .separability import (
    BISEPARABLE,
    CERTIFIED,
    INCONCLUSIVE,
    biseparable_report,
    certify_genuinely_collective,
    example_povms,
    verify_coarse_graining,
)
from .walk.anchors import validate_against_anchors
from .walk.engine import Lattice, extract_effective_povm, perturb_schedule
from .walk.schedule import default_schedule, load_schedule, schedule_to_dict, schedule_to_json
from .walk.synthesis import synthesize_segment_coins
from .states import make_rng, psi_theta

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
WALK_NOISE_STREAM = est.NOISE_STREAM


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _complex_matrix(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _schedule(args):
    if getattr(args, "schedule", None):
        return load_schedule(args.schedule)
    return default_schedule()


def cmd_verify_povm(args):
    p = optimal_povm()
    report = validate_povm(p)
    kit = symmetry_kit()
    e7 = p.element("E7")
    traces = [float(np.trace(e).real) for e in p.elements]
    decomposition = e7_decomposition_check()
    sym_resid = float(np.max(np.abs(kit.P3 @ e7 @ kit.P3)))
    ok = (
        report.passed
        and all(abs(t - 2 / 3) <= 1e-12 for t in traces[:6])
        and abs(traces[6] - 4) <= 1e-12
        and decomposition <= 1e-12
        and sym_resid <= 1e-12
    )
    out = {
        "validation": report.to_json(),
        "traces": dict(zip(p.labels, traces)),
        "e7_decomposition_residual": decomposition,
        "e7_symmetric_support_residual": sym_resid,
        "pass": ok,
    }
    _emit(_json(out), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_walk(args):
    if args.walk_command == "dump-schedule":
        sched, plan = _schedule(args)
        _emit(schedule_to_json(sched, plan), args.out)
        return EXIT_OK
    if args.walk_command == "validate":
        sched, plan = _schedule(args)
        report = validate_against_anchors(sched, plan)
        _emit(_json(report.to_json()), args.out)
        return EXIT_OK if report.passed else EXIT_FAIL
    if args.walk_command == "extract":
        sched, plan = _schedule(args)
        lattice = None
        if args.sigma > 0:
            sched = perturb_schedule(sched, args.sigma, make_rng(args.seed, WALK_NOISE_STREAM))
            lattice = Lattice.for_schedule(sched)
        p = extract_effective_povm(sched, plan, lattice)
        report = validate_povm(p)
        out = {
            "labels": list(p.labels),
            "elements": [_complex_matrix(e) for e in p.elements],
            "validation": report.to_json(),
            "povm_fidelity": povm_fidelity(p, optimal_povm()),
            "reference_state_fidelity": measured_povm_fidelity(p),
            "sigma": args.sigma,
            "seed": args.seed,
        }
        _emit(_json(out), args.out)
        return EXIT_OK if report.passed else EXIT_FAIL
    if args.walk_command == "synthesize":
        t_from, t_to = _segment(args.segment)
        base, plan = _schedule(args)
        try:
            sols = synthesize_segment_coins(t_from, t_to, base, plan, phases=args.phases, match=args.match)
        except NoSolution as exc:
            print(f"no solution: {exc}", file=sys.stderr)
            return EXIT_FAIL
        steps = set(range(t_from + 1, t_to + 1))
        out = {
            "segment": [t_from, t_to],
            "n_solutions": len(sols),
            "solutions": [
                [row for row in schedule_to_dict(s, plan)["assignments"] if row["t"] in steps] for s in sols
            ],
        }
        _emit(_json(out), args.out)
        return EXIT_OK
    raise AssertionError(args.walk_command)


def _segment(text):
    try:
        a, b = (int(v) for v in text.split("-"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"segment must look like '3-6', got {text!r}") from None
    return a, b


def _config(args):
    return est.EstimationConfig(
        trials_per_rep=args.trials,
        repetitions=args.reps,
        master_seed=args.seed,
        noise_sigma=args.sigma,
        source=args.source,
    )


def cmd_estimate(args):
    cfg = _config(args)
    b = est.bounds()
    if args.estimate_command == "sweep":
        rows = est.sweep_theta(cfg)
        if args.format == "json":
            text = _json({"rows": rows, "bounds": b._asdict()})
        else:
            text = est.sweep_to_csv(rows)
        _emit(text, args.out)
        print(f"min f_mc {min(r['f_mc'] for r in rows):.6f}; local bound {b.local:.6f}", file=sys.stderr)
        return EXIT_OK
    if args.estimate_command == "icosa":
        res = est.icosahedron_average(cfg)
        if args.format == "csv":
            text = _states_csv(res)
        else:
            text = _json(res.to_json())
        _emit(text, args.out)
        print(
            f"aggregate {res.mean:.6f} +- {res.stderr:.6f}; bounds local {b.local:.6f} "
            f"biseparable {b.biseparable:.6f} collective {b.collective:.6f}",
            file=sys.stderr,
        )
        return EXIT_OK
    if args.estimate_command == "single":
        p = est.povm_for_config(cfg)
        s = est.run_trials(psi_theta(args.theta), p, cfg, state_index=0, label=f"theta={args.theta!r}")
        out = {**s.to_json(), "theta": args.theta, "rep_means": s.rep_means}
        if args.format == "csv":
            text = "theta,f_analytic,f_mc,std,stderr,n_trials\n" + ",".join(
                repr(float(v)) if isinstance(v, float) else str(v)
                for v in (args.theta, s.f_analytic, s.f_mc, s.std, s.stderr, s.n_trials)
            ) + "\n"
        else:
            text = _json(out)
        _emit(text, args.out)
        return EXIT_OK
    if args.estimate_command == "calibrate":
        cal = est.calibrate_noise(args.target, n_seeds=args.seeds, seed=args.seed)
        _emit(_json(cal.to_json()), args.out)
        return EXIT_OK
    raise AssertionError(args.estimate_command)


def _states_csv(res):
    lines = ["label,f_analytic,f_mc,std,stderr,n_trials"]
    for s in res.states:
        lines.append(f"{s.label},{s.f_analytic!r},{s.f_mc!r},{s.std!r},{float(s.stderr)!r},{s.n_trials}")
    return "\n".join(lines) + "\n"


def cmd_certify(args):
    optimal = certify_genuinely_collective(optimal_povm())
    k2 = certify_genuinely_collective(example_povms(0.5)["K2"], construction=verify_coarse_graining(0.5))
    k2_construction = biseparable_report(0.5)
    sym = certify_genuinely_collective(symmetric_povm())
    ok = (
        optimal.verdict == CERTIFIED
        and k2.verdict == INCONCLUSIVE
        and k2_construction.verdict == BISEPARABLE
        and sym.verdict == INCONCLUSIVE
    )
    out = {
        "optimal": optimal.to_json(),
        "K2": k2.to_json(),
        "K2_construction": k2_construction.to_json(),
        "symmetric_six": sym.to_json(),
        "pass": ok,
    }
    _emit(_json(out), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _pos_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--trials", type=_pos_int, default=50000)
    common.add_argument("--reps", type=_pos_int, default=10)
    common.add_argument("--sigma", type=_nonneg_float, default=0.0)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--schedule", default=None, help="schedule JSON file (default: embedded)")

    parser = argparse.ArgumentParser(prog="collective-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-povm", parents=[common], help="build and check the seven-outcome POVM")

    walk = sub.add_parser("walk", help="quantum-walk realisation")
    wsub = walk.add_subparsers(dest="walk_command", required=True)
    wsub.add_parser("validate", parents=[common])
    wsub.add_parser("extract", parents=[common])
    wsub.add_parser("dump-schedule", parents=[common])
    syn = wsub.add_parser("synthesize", parents=[common])
    syn.add_argument("--segment", default="3-6", help="anchored steps, e.g. 3-6")
    syn.add_argument("--phases", choices=("final", "all"), default="final")
    syn.add_argument("--match", choices=("exact", "branch"), default="exact")

    estimate = sub.add_parser("estimate", help="state-estimation experiments")
    esub = estimate.add_subparsers(dest="estimate_command", required=True)
    for name in ("sweep", "icosa", "single", "calibrate"):
        ep = esub.add_parser(name, parents=[common])
        ep.add_argument("--source", choices=("ideal", "walk"), default="ideal")
    esub.choices["single"].add_argument("--theta", type=float, default=0.0)
    esub.choices["calibrate"].add_argument("--target", type=float, default=0.9942)
    esub.choices["calibrate"].add_argument("--seeds", type=_pos_int, default=50)

    sub.add_parser("certify", parents=[common], help="genuine-collectiveness certificate")
    return parser


DEFAULT_FORMATS = {"sweep": "csv"}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = DEFAULT_FORMATS.get(getattr(args, "estimate_command", None), "json")
    handlers = {"verify-povm": cmd_verify_povm, "walk": cmd_walk, "estimate": cmd_estimate, "certify": cmd_certify}
    try:
        return handlers[args.command](args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CollectiveLabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
