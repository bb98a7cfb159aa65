"""Command-line front end.

Subcommands: gen, run, exact, sweep, verify {impartial,strong-sample,gap},
refute.  Every command is deterministic given its full argument list;
randomness enters only through explicit seeds, never the clock.

Exit codes: 0 on success (including an expected witness from refute),
1 when a verification finds violations, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .core import format_profile, load_profile
from .exact import (
    DEFAULT_SEQUENCE_BUDGET,
    compute_bound,
    exact_distribution,
    expected_winner_degree,
)
from .generators import FAMILIES, GeneratorSpec
from .mechanisms import MechanismSpec, parse_mechanism
from .montecarlo import SweepConfig, TrialPlan, estimate, fit_scaling, rows_to_csv, rows_to_json, sweep
from .verify import (
    SAMPLE_CATALOG,
    check_impartial,
    check_strong_sample,
    format_witness,
    measure_additive_gap_exhaustive,
    named_oracle,
    profile_count,
    refute_two_additive,
    validate_witness,
)

_MAX_WITNESSES_SHOWN = 3


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_subject(args) -> "MechanismSpec | object":
    """A --mech spec or a --oracle callable, for the verify subcommands."""
    if getattr(args, "mech", None):
        return parse_mechanism(args.mech)
    return named_oracle(args.oracle)


def cmd_gen(args) -> int:
    params = {}
    for key in ("delta", "k", "v"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    if args.p is not None:
        params["p"] = args.p
    spec = GeneratorSpec.from_mapping(args.family, params)
    if spec.needs_seed and args.seed is None:
        raise ValueError(f"family {args.family} requires --seed")
    profile = spec.build(args.n, args.seed if spec.needs_seed else None)
    _emit(format_profile(profile), args.out)
    return 0


def _run_exact(spec: MechanismSpec, profile, args) -> dict:
    dist = exact_distribution(spec, profile, budget=args.budget)
    mean = expected_winner_degree(dist, profile)
    delta = profile.delta
    result = {
        "mechanism": spec.label(),
        "n": profile.n,
        "delta": delta,
        "mean_degree": str(mean),
        "gap": str(delta - mean),
        "p_none": str(dist.p_none),
        "exact": True,
    }
    return result


def cmd_run(args) -> int:
    spec = parse_mechanism(args.mech)
    profile = load_profile(args.profile)
    if args.exact:
        result = _run_exact(spec, profile, args)
    else:
        if args.trials is None:
            raise ValueError("one of --exact or --trials is required")
        if args.seed is None:
            raise ValueError("--trials requires --seed")
        report = estimate(spec, profile, TrialPlan(args.trials, args.seed))
        result = {
            "mechanism": spec.label(),
            "n": report.n,
            "k": report.k,
            "delta": report.delta,
            "mean_degree": report.mean_degree,
            "gap": report.gap,
            "std_err": report.std_err,
            "ci95": report.ci95_half_width,
            "no_winner_rate": report.no_winner_rate,
            "trials": report.trials,
            "master_seed": report.master_seed,
            "exact": report.exact,
        }
    if args.format == "json":
        _emit(json.dumps(result, indent=2, sort_keys=True), args.out)
    else:
        _emit("\n".join(f"{key}={_plain(value)}" for key, value in result.items()), args.out)
    return 0


def _plain(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def cmd_exact(args) -> int:
    spec = parse_mechanism(args.mech)
    profile = load_profile(args.profile)
    dist = exact_distribution(spec, profile, budget=args.budget, method=args.method)
    mean = expected_winner_degree(dist, profile)
    delta = profile.delta
    doc = dist.to_json_dict()
    doc.update(
        mechanism=spec.label(),
        delta=delta,
        expected_degree=str(mean),
        gap=str(delta - mean),
    )
    try:
        bound = compute_bound(spec, profile.n)
        doc["bound_kind"] = bound.kind
        doc["bound_value"] = bound.bound_value
    except ValueError:
        pass
    if args.format == "json":
        _emit(json.dumps(doc, indent=2, sort_keys=True), args.out)
    else:
        lines = [f"mechanism={doc['mechanism']}", f"n={profile.n}"]
        lines.extend(f"p[{u}]={p}" for u, p in sorted(doc["p"].items(), key=lambda kv: int(kv[0])))
        lines.append(f"p_none={doc['p_none']}")
        lines.append(f"delta={delta}")
        lines.append(f"expected_degree={mean}")
        lines.append(f"gap={delta - mean}")
        if "bound_value" in doc:
            lines.append(f"bound[{doc['bound_kind']}]={doc['bound_value']}")
        _emit("\n".join(lines), args.out)
    return 0


def cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if args.seed is not None:
        if not isinstance(doc, dict):
            raise ValueError("/: config must be a JSON object")
        doc["master_seed"] = args.seed
    config = SweepConfig.from_json_dict(doc)
    rows = sweep(config, jobs=args.jobs)
    fit = fit_scaling(rows) if args.fit else None
    text = rows_to_json(rows, fit) if args.format == "json" else rows_to_csv(rows, fit)
    _emit(text, args.out)
    return 0


def _report_witnesses(witnesses, domain: str) -> int:
    if not witnesses:
        print(f"verified ({domain}, 0 witnesses)")
        return 0
    print(f"FAILED ({domain}, {len(witnesses)} witnesses)")
    for witness in witnesses[:_MAX_WITNESSES_SHOWN]:
        print(format_witness(witness))
    if len(witnesses) > _MAX_WITNESSES_SHOWN:
        print(f"... and {len(witnesses) - _MAX_WITNESSES_SHOWN} more")
    return 1


def cmd_verify_impartial(args) -> int:
    subject = _load_subject(args)
    witnesses = check_impartial(
        subject, args.n, args.model, budget=args.budget, max_n=args.max_n
    )
    return _report_witnesses(
        witnesses, f"{profile_count(args.n, args.model)} {args.model} profiles, n={args.n}"
    )


def cmd_verify_strong_sample(args) -> int:
    try:
        g = SAMPLE_CATALOG[args.g]
    except KeyError:
        raise ValueError(
            f"unknown sample function {args.g!r}; known: {', '.join(sorted(SAMPLE_CATALOG))}"
        ) from None
    witnesses = check_strong_sample(g, args.n, max_n=args.max_n)
    return _report_witnesses(witnesses, f"{profile_count(args.n, 'single')} single profiles, n={args.n}")


def cmd_verify_gap(args) -> int:
    subject = _load_subject(args)
    alpha, worst = measure_additive_gap_exhaustive(
        subject, args.n, args.model, budget=args.budget, max_n=args.max_n
    )
    print(f"alpha={alpha}")
    print("worst profile:")
    for line in format_profile(worst).splitlines():
        print(f"    {line}")
    return 0


def cmd_refute(args) -> int:
    oracle = named_oracle(args.oracle)
    witness = refute_two_additive(oracle)
    print(format_witness(witness))
    if validate_witness(witness, oracle):
        print("witness validates")
        return 0
    print("witness FAILED re-validation")
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="impsel",
        description="Impartial selection mechanisms on nomination graphs: "
        "generate instances, evaluate mechanisms exactly or by Monte Carlo, "
        "and verify impartiality and additive guarantees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate an instance profile")
    p_gen.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--delta", type=int, help="in-degree target (single-worst)")
    p_gen.add_argument("--k", type=int, help="sample size the instance stresses (bound-stress)")
    p_gen.add_argument("--v", type=int, help="target vertex (fixed-sample-adversary, star)")
    p_gen.add_argument("--p", type=float, help="edge probability (random-multi)")
    p_gen.add_argument("--seed", type=int, help="instance seed (random families)")
    p_gen.add_argument("--out", help="output file (default: stdout)")

    p_run = sub.add_parser("run", help="evaluate one mechanism on one profile")
    p_run.add_argument("--mech", required=True)
    p_run.add_argument("--profile", required=True)
    p_run.add_argument("--exact", action="store_true", help="enumerate instead of sampling")
    p_run.add_argument("--trials", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--budget", type=int, default=DEFAULT_SEQUENCE_BUDGET)
    p_run.add_argument("--format", choices=("text", "json"), default="text")
    p_run.add_argument("--out")

    p_exact = sub.add_parser("exact", help="full exact winner distribution")
    p_exact.add_argument("--mech", required=True)
    p_exact.add_argument("--profile", required=True)
    p_exact.add_argument("--method", choices=("auto", "sequences", "sets"), default="auto")
    p_exact.add_argument("--budget", type=int, default=DEFAULT_SEQUENCE_BUDGET)
    p_exact.add_argument("--format", choices=("text", "json"), default="text")
    p_exact.add_argument("--out")

    p_sweep = sub.add_parser("sweep", help="run a JSON-configured experiment")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--fit", action="store_true", help="append a log-log scaling fit")
    p_sweep.add_argument("--seed", type=int, help="override the config's master_seed")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--out")

    p_verify = sub.add_parser("verify", help="exhaustive verification")
    vsub = p_verify.add_subparsers(dest="verify_command", required=True)

    def add_subject_flags(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--mech")
        group.add_argument("--oracle")
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--model", choices=("single", "multi"), default="single")
        p.add_argument("--budget", type=int, default=DEFAULT_SEQUENCE_BUDGET)
        p.add_argument("--max-n", type=int, dest="max_n")

    p_vi = vsub.add_parser("impartial", help="exhaustive impartiality check")
    add_subject_flags(p_vi)

    p_vs = vsub.add_parser("strong-sample", help="strong-sample check of a catalog function")
    p_vs.add_argument("--g", required=True)
    p_vs.add_argument("--n", type=int, required=True)
    p_vs.add_argument("--max-n", type=int, dest="max_n")

    p_vg = vsub.add_parser("gap", help="exact worst additive gap")
    add_subject_flags(p_vg)

    p_refute = sub.add_parser("refute", help="corner a 4-vertex oracle out of 2-additivity")
    p_refute.add_argument("--oracle", required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {
        "gen": cmd_gen,
        "run": cmd_run,
        "exact": cmd_exact,
        "sweep": cmd_sweep,
        "refute": cmd_refute,
    }
    verify_commands = {
        "impartial": cmd_verify_impartial,
        "strong-sample": cmd_verify_strong_sample,
        "gap": cmd_verify_gap,
    }
    try:
        if args.command == "verify":
            return verify_commands[args.verify_command](args)
        return commands[args.command](args)
    except (ValueError, OSError) as exc:
        # every input problem in this package is a ValueError subclass:
        # profile format, model violations, budget refusals, bad configs
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
