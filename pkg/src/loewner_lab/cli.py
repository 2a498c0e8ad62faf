"""Command line interface.

Exit codes: 0 = ran, no violations; 1 = ran, violations recorded;
2 = usage or configuration error; 3 = numerical failure.
"""

import argparse
import csv
import json
import sys

from . import cdj, entropy, harness
from .errors import (
    ApproximationError,
    AssumptionError,
    ConfigError,
    ConvergenceError,
    LoewnerLabError,
)
from .funcspec import function_from_spec
from .kantorovich import kantorovich_f, kantorovich_r
from .linalg import matrix_from_json, matrix_to_json
from .phimap import PhiMap
from .sandwich import build_sandwich, tsallis_sandwich_polynomials

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _params(pairs):
    out = {}
    for item in pairs or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--param {name}: {value!r} is not a number") from None
    return out


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _load_matrix(path):
    try:
        return matrix_from_json(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: bad matrix JSON ({exc})") from None


def _load_phi(path):
    try:
        return PhiMap.from_json(_load_json(path))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"{path}: bad phi JSON ({exc})") from None


def _emit(obj, out):
    text = json.dumps(obj, sort_keys=True, indent=1)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "chain", "index", "gap"])
        w.writerows(rows)


def _gap_rows(trial, verdicts):
    for chain, v in verdicts.items():
        for i, g in enumerate(v):
            yield (trial, chain, i, repr(float(g)))


def _report(kind, body):
    return {"schema": harness.SCHEMA, "kind": kind, **body}


def cmd_sandwich(args):
    if args.tsallis_q is not None:
        sw = tsallis_sandwich_polynomials(args.tsallis_q, args.m, args.M, relax=args.relax)
    else:
        if args.f is None or args.epsilon is None:
            raise UsageError("sandwich needs --f and --epsilon (or --tsallis-q)")
        f = function_from_spec(args.f, _params(args.param))
        sw = build_sandwich(f, args.m, args.M, args.epsilon, max_degree=args.max_degree)
    _emit(_report("sandwich", {"sandwich": sw.to_json()}), args.out)
    return EXIT_OK


def cmd_kantorovich(args):
    if (args.r is None) == (args.f is None):
        raise UsageError("give exactly one of --r and --f")
    if args.r is not None:
        body = {"m": args.m, "M": args.M, "r": args.r, "value": kantorovich_r(args.m, args.M, args.r)}
    else:
        f = function_from_spec(args.f, _params(args.param))
        value, arg = kantorovich_f(args.m, args.M, f)
        body = {"m": args.m, "M": args.M, "f": f.to_json(), "value": value, "argmax": arg}
    _emit(_report("kantorovich", body), args.out)
    return EXIT_OK


def cmd_bound(args):
    a = _load_matrix(args.A)
    phi = _load_phi(args.phi)
    f = function_from_spec(args.f, _params(args.param))
    scales = cdj.CdjScales(args.c, args.d, args.e)
    rep = cdj.corollary_majorization(cdj.theorem1_sandwich(phi, f, a, args.epsilon, scales, tol=args.tol))
    _emit(_report("theorem1", rep.to_json()), args.out)
    if args.csv:
        gaps = {"lower": rep.verdict_lower.gap_spectrum, "upper": rep.verdict_upper.gap_spectrum}
        _write_csv(args.csv, _gap_rows(0, gaps))
    return EXIT_OK if rep.holds else EXIT_VIOLATION


def cmd_entropy(args):
    a = _load_matrix(args.A)
    b = _load_matrix(args.B)
    kind = args.which
    if kind in ("tsallis", "relent"):
        if kind == "tsallis":
            if args.q is None:
                raise UsageError("entropy tsallis needs --q")
            mat = entropy.tsallis_relative_entropy(a, b, args.q)
        else:
            mat = entropy.relative_operator_entropy(a, b)
        _emit(_report(kind, {"value": matrix_to_json(mat)}), args.out)
        return EXIT_OK
    if args.m is None or args.M is None:
        raise UsageError(f"entropy {kind} needs --m and --M")
    if kind == "lemma5":
        res = entropy.lemma5_bounds(a, b, args.m, args.M, relax=args.relax)
    else:
        if args.q is None:
            raise UsageError(f"entropy {kind} needs --q")
        params = entropy.EntropyParams(args.q, args.m, args.M, args.relax)
        if kind == "lemma4":
            res = entropy.lemma4_bounds(a, b, params)
        else:
            if not args.phi:
                raise UsageError(f"entropy {kind} needs --phi")
            phi = _load_phi(args.phi)
            fn = {
                "lemma6": entropy.lemma6_bounds,
                "lemma7": entropy.lemma7_phi_of_tsallis_bounds,
                "theorem2": entropy.theorem2_sandwich,
            }[kind]
            res = fn(a, b, params, phi)
    _emit(_report(kind, res.to_json()), args.out)
    if args.csv:
        gaps = {"lower": res.verdict_lower.gap_spectrum, "upper": res.verdict_upper.gap_spectrum}
        _write_csv(args.csv, _gap_rows(0, gaps))
    return EXIT_OK if res.holds else EXIT_VIOLATION


def _suite_exit(report):
    if report.numerical_failures:
        return EXIT_NUMERIC
    return EXIT_VIOLATION if report.violation_count else EXIT_OK


def cmd_verify(args):
    obj = _load_json(args.config) if args.config else {}
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    if args.scenario:
        obj["scenario"] = args.scenario
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.trials is not None:
        obj["trials"] = args.trials
    cfg = harness.SuiteConfig.from_json(obj)
    rep = harness.run_suite(cfg, jobs=args.jobs)
    text = rep.dumps(include_time=not args.no_time)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.csv:
        rows = []
        for t in rep.trials:
            rows.extend(_gap_rows(t["trial"], t.get("gaps", {})))
        _write_csv(args.csv, rows)
    counts = rep.summary["status_counts"]
    print(f"{cfg.scenario}: {cfg.trials} trials, {rep.violation_count} violations, status {counts}", file=sys.stderr)
    return _suite_exit(rep)


def cmd_replay(args):
    record = _load_json(args.record)
    summary, reproduced = harness.replay(record)
    _emit(_report("replay", {"trial": summary, "reproduced": reproduced}), args.out)
    if summary["status"] == "numerical_failure":
        return EXIT_NUMERIC
    return EXIT_VIOLATION if summary["status"] == "violation" else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="loewner-lab", description="Generalized Choi-Davis-Jensen bounds on Hermitian matrices.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sandwich", help="build a certified one-sided polynomial pair")
    s.add_argument("--f", help="catalog name or expression in x")
    s.add_argument("--param", action="append", metavar="NAME=VALUE")
    s.add_argument("--m", type=float, required=True)
    s.add_argument("--M", type=float, required=True)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--max-degree", type=int, default=256)
    s.add_argument("--tsallis-q", type=float, help="closed-form quadratic pair for (x^q - 1)/q")
    s.add_argument("--relax", action="store_true", help="allow m < 2 or M < 5m (marked outside hypotheses)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sandwich)

    k = sub.add_parser("kantorovich", help="Kantorovich constant K(m, M, r) or K(m, M, f)")
    k.add_argument("--m", type=float, required=True)
    k.add_argument("--M", type=float, required=True)
    k.add_argument("--r", type=float)
    k.add_argument("--f")
    k.add_argument("--param", action="append", metavar="NAME=VALUE")
    k.add_argument("--out")
    k.set_defaults(func=cmd_kantorovich)

    b = sub.add_parser("bound", help="two-sided bound on f(Phi(A))")
    b.add_argument("--A", required=True, help="matrix JSON file")
    b.add_argument("--phi", required=True, help="Phi JSON file")
    b.add_argument("--f", required=True)
    b.add_argument("--param", action="append", metavar="NAME=VALUE")
    b.add_argument("--epsilon", type=float, default=1e-3)
    b.add_argument("--c", type=float, default=1.0)
    b.add_argument("--d", type=float, default=1.0)
    b.add_argument("--e", type=float, default=1.0)
    b.add_argument("--tol", type=float, default=1e-9)
    b.add_argument("--out")
    b.add_argument("--csv", help="write gap spectra as CSV")
    b.set_defaults(func=cmd_bound)

    e = sub.add_parser("entropy", help="Tsallis relative entropy and its bounds")
    e.add_argument("which", choices=["tsallis", "relent", "lemma4", "lemma5", "lemma6", "lemma7", "theorem2"])
    e.add_argument("--A", required=True)
    e.add_argument("--B", required=True)
    e.add_argument("--q", type=float)
    e.add_argument("--m", type=float)
    e.add_argument("--M", type=float)
    e.add_argument("--phi")
    e.add_argument("--relax", action="store_true")
    e.add_argument("--out")
    e.add_argument("--csv")
    e.set_defaults(func=cmd_entropy)

    v = sub.add_parser("verify", help="run a randomized falsification suite")
    v.add_argument("--scenario", choices=harness.SCENARIOS)
    v.add_argument("--config", help="JSON file mirroring SuiteConfig")
    v.add_argument("--seed", type=int)
    v.add_argument("--trials", type=int)
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--no-time", action="store_true", help="omit wall time so reports compare byte for byte")
    v.add_argument("--out")
    v.add_argument("--csv")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("replay", help="re-run the trial behind a counterexample record")
    r.add_argument("record")
    r.add_argument("--out")
    r.set_defaults(func=cmd_replay)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, ApproximationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except AssumptionError as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LoewnerLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
