"""Command-line entry point: ``simpsons <command> ...``.

Exit codes: 0 on success, 1 for usage or validation errors, 2 for data
errors (unreadable or malformed input, unknown columns, empty arms).
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import paradox_bn, rct_design, trial_sim
from .io import read_table_csv
from .tables import Outcome, TableError, Treatment, detect_reversal, scan_confounders

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Report:
    command: str
    inputs: dict
    results: dict
    format: str = "text"
    lines: list[str] = field(default_factory=list, repr=False)

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "format": "json",
            "inputs": self.inputs,
            "results": self.results,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def render(self) -> str:
        if self.format == "json":
            return self.to_json()
        return "\n".join(self.lines)


def _pct(x) -> str:
    return "n/a" if x is None else f"{100 * x:.1f}%"


def _parse_treatment(text: str) -> Treatment:
    parts = text.split(":")
    if len(parts) == 1:
        return Treatment(parts[0], "true", "false")
    if len(parts) == 3 and all(parts):
        return Treatment(*parts)
    raise UsageError(f"--treatment expects COLUMN or COLUMN:TREATED:CONTROL, got {text!r}")


def _parse_outcome(text: str) -> Outcome:
    parts = text.split(":")
    if len(parts) == 1:
        return Outcome(parts[0], "true")
    if len(parts) == 2 and all(parts):
        return Outcome(*parts)
    raise UsageError(f"--outcome expects COLUMN or COLUMN:SUCCESS, got {text!r}")


def _split_names(text: str | None) -> list[str]:
    return [s.strip() for s in (text or "").split(",") if s.strip()]


def _parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("true", "t", "1", "yes"):
        return True
    if v in ("false", "f", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _load_table(args, treatment: Treatment, outcome: Outcome):
    states = {
        treatment.variable: [treatment.control, treatment.treated],
        outcome.variable: [outcome.success],
    }
    try:
        table = read_table_csv(args.csv, counts=args.counts, states=states)
    except OSError as exc:
        raise DataError(f"cannot read {args.csv}: {exc}") from None
    except TableError as exc:
        raise DataError(str(exc)) from None
    for name in (treatment.variable, outcome.variable):
        if name not in table.names:
            raise DataError(f"unknown column {name!r}; columns are {list(table.names)}")
    return table


def _association_lines(result) -> list[str]:
    agg = result.aggregate.as_dict()
    lines = [
        f"{'stratum':<32} {'treated':>16} {'control':>16} {'delta':>8}",
        f"{'(all)':<32} {_arm(agg, 'treated'):>16} {_arm(agg, 'control'):>16} {_pct(agg['delta']):>8}",
    ]
    for key, summary in result.strata.items():
        d = summary.as_dict()
        label = ", ".join(f"{n}={s}" for n, s in zip(result.strata_variables, key))
        lines.append(f"{label:<32} {_arm(d, 'treated'):>16} {_arm(d, 'control'):>16} {_pct(d['delta']):>8}")
    return lines


def _arm(d: dict, arm: str) -> str:
    return f"{d[f'{arm}_recovered']}/{d[f'{arm}_total']} {_pct(d[f'{arm}_rate'])}"


def cmd_analyze(args) -> Report:
    treatment, outcome = _parse_treatment(args.treatment), _parse_outcome(args.outcome)
    strata = _split_names(args.strata)
    table = _load_table(args, treatment, outcome)
    for name in strata:
        if name not in table.names:
            raise DataError(f"unknown column {name!r}; columns are {list(table.names)}")
    try:
        result = detect_reversal(table, treatment, outcome, strata)
    except TableError as exc:
        raise DataError(str(exc)) from None
    inputs = {
        "csv": str(args.csv),
        "counts": args.counts,
        "treatment": vars_of(treatment),
        "outcome": vars_of(outcome),
        "strata": strata,
    }
    lines = [f"analyze {args.csv} (n={table.total})"] + _association_lines(result)
    if result.undefined_strata:
        lines.append(f"undefined strata (empty arm): {len(result.undefined_strata)}")
    if strata:
        lines.append(f"full reversal: {str(result.full_reversal).lower()}")
    return Report("analyze", inputs, result.as_dict(), args.format, lines)


def vars_of(obj) -> dict:
    return dict(vars(obj))


def cmd_scan(args) -> Report:
    treatment, outcome = _parse_treatment(args.treatment), _parse_outcome(args.outcome)
    if args.max_subset_size < 1:
        raise UsageError("--max-subset-size must be >= 1")
    table = _load_table(args, treatment, outcome)
    try:
        hits = scan_confounders(table, treatment, outcome, args.max_subset_size)
    except TableError as exc:
        raise DataError(str(exc)) from None
    inputs = {
        "csv": str(args.csv),
        "counts": args.counts,
        "treatment": vars_of(treatment),
        "outcome": vars_of(outcome),
        "max_subset_size": args.max_subset_size,
    }
    results = {"hits": [{"subset": list(s), "result": r.as_dict()} for s, r in hits]}
    lines = [f"scan {args.csv}: {len(hits)} reversing subset(s)"]
    lines += ["  {" + ", ".join(s) + "}" for s, _ in hits]
    return Report("scan", inputs, results, args.format, lines)


def _spec_from_args(args) -> paradox_bn.ParadoxBnSpec:
    try:
        if args.spec:
            base = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        else:
            base = {}
    except OSError as exc:
        raise DataError(f"cannot read {args.spec}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.spec}: invalid JSON: {exc}") from None
    for name in ("n", "p1", "p2", "p3", "p4", "p", "q", "prior_xn"):
        value = getattr(args, name, None)
        if value is not None:
            base[name] = value
    try:
        spec = paradox_bn.ParadoxBnSpec.from_dict(base)
    except paradox_bn.SpecError as exc:
        raise UsageError(f"invalid spec: {exc}") from None
    except TypeError as exc:
        raise UsageError(f"invalid spec: {exc}") from None
    return spec


def _regime_notes(spec) -> list[str]:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        paradox_bn.validate(spec)
    return [str(w.message) for w in caught]


def cmd_generate(args) -> Report:
    spec = _spec_from_args(args)
    cert = paradox_bn.certify_reversal(spec)
    notes = _regime_notes(spec)
    npt = paradox_bn.build_npt(spec)
    if args.npt_out:
        Path(args.npt_out).write_text(npt.to_csv(), encoding="utf-8")
    if args.spec_out:
        spec.save(args.spec_out)
    results = {"spec": spec.to_dict(), "certificate": cert.to_dict(), "regime_warnings": notes}
    lines = [
        f"spec n={spec.n} p1..p4=({spec.p1}, {spec.p2}, {spec.p3}, {spec.p4}) p={spec.p} q={spec.q} prior_xn={spec.prior_xn}",
        f"stratified drug worse: {str(cert.stratified_drug_worse).lower()}",
        f"hidden-confounder rates: drug {cert.case2_drug_rate:.6g}, placebo {cert.case2_placebo_rate:.6g}",
        f"hidden drug better: {str(cert.hidden_drug_better).lower()}",
        f"paradox: {str(cert.paradox).lower()}",
    ]
    lines += [f"warning: {m}" for m in notes]
    if args.npt_out:
        lines.append(f"NPT written to {args.npt_out}")
    inputs = {"spec": args.spec, "npt_out": args.npt_out}
    return Report("generate", inputs, results, args.format, lines)


def cmd_infer(args) -> Report:
    spec = _spec_from_args(args)
    if args.d is None:
        raise UsageError("--d is required")
    if args.case == 1:
        if args.xn is None:
            raise UsageError("--case 1 requires --xn")
        value = paradox_bn.case1_recovery(spec, args.xn, args.d)
        query = f"P(Recovered=T | Xn={args.xn}, D={args.d})"
    else:
        try:
            value = paradox_bn.case2_recovery(spec, args.d)
        except ZeroDivisionError as exc:
            raise UsageError(str(exc)) from None
        query = f"P(Recovered=T | D={args.d}), Xn unobserved"
    inputs = {"spec": spec.to_dict(), "case": args.case, "xn": args.xn, "d": args.d}
    return Report("infer", inputs, {"query": query, "probability": value}, args.format, [f"{query} = {value:.12g}"])


def cmd_simulate(args) -> Report:
    if args.size < 1:
        raise UsageError(f"--size must be >= 1, got {args.size}")
    spec = _spec_from_args(args)
    dataset = trial_sim.sample(spec, args.size, args.seed)
    trial_sim.write_csv(dataset, args.out)
    inputs = {"spec": spec.to_dict(), "size": args.size, "seed": args.seed, "out": str(args.out)}
    results = {"records": len(dataset), "spec_fingerprint": dataset.spec_fingerprint, "columns": trial_sim.column_names(spec.n)}
    lines = [f"wrote {len(dataset)} records to {args.out} (seed {args.seed})"]
    return Report("simulate", inputs, results, args.format, lines)


def _parse_factor(text: str) -> rct_design.Factor:
    name, sep, rest = text.partition(":")
    if not sep or not name or not rest:
        raise UsageError(f"factor must be NAME:CARDINALITY or NAME:STATE,STATE,..., got {text!r}")
    try:
        if "," in rest:
            return rct_design.Factor.of(name, rest.split(","))
        return rct_design.Factor.of(name, int(rest))
    except ValueError as exc:
        raise UsageError(f"factor {text!r}: {exc}") from None


def cmd_design(args) -> Report:
    try:
        if args.spec:
            spec = rct_design.DesignSpec.load(args.spec)
            if args.min_per_group is not None:
                spec = rct_design.DesignSpec(spec.factors, args.min_per_group)
        else:
            if not args.factors:
                raise UsageError("give factors as NAME:CARDINALITY or a --spec file")
            spec = rct_design.DesignSpec(
                tuple(_parse_factor(f) for f in args.factors),
                50 if args.min_per_group is None else args.min_per_group,
            )
    except OSError as exc:
        raise DataError(f"cannot read {args.spec}: {exc}") from None
    except (rct_design.DesignError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"invalid design: {exc}") from None
    try:
        plan = rct_design.allocate(spec, args.total) if args.total is not None else rct_design.plan(spec)
    except rct_design.DesignError as exc:
        raise UsageError(str(exc)) from None
    if args.plan_out:
        if plan.groups is None:
            raise UsageError("--plan-out needs --total")
        Path(args.plan_out).write_text(plan.to_csv(), encoding="utf-8")
    inputs = {**spec.to_dict(), "total": args.total}
    lines = [
        f"factors: {', '.join(f'{f.name}:{f.cardinality}' for f in spec.factors)}",
        f"control groups: {plan.group_count:,}",
        f"subjects required (min {spec.min_per_group} per group): {plan.subjects_required:,}",
    ]
    if plan.groups is not None:
        size = plan.groups[0][1]
        lines.append(f"allocation of {args.total:,}: {plan.group_count} groups of {size:,}")
        for key, n in plan.groups[:64]:
            lines.append("  (" + ", ".join(key) + f"): {n}")
        if len(plan.groups) > 64:
            lines.append(f"  ... {len(plan.groups) - 64} more")
    return Report("design", inputs, plan.to_dict(), args.format, lines)


def _add_spec_args(p):
    p.add_argument("--spec", help="ParadoxBnSpec JSON file")
    p.add_argument("--n", type=int)
    for name in ("p1", "p2", "p3", "p4", "p", "q"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--prior-xn", dest="prior_xn", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="simpsons", description="Simpson's paradox toolkit")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, func in (("analyze", cmd_analyze), ("scan", cmd_scan)):
        p = sub.add_parser(name, parents=[common], help=f"{name} a CSV of trial data")
        p.add_argument("csv")
        p.add_argument("--treatment", default="Drug", help="COLUMN[:TREATED:CONTROL]")
        p.add_argument("--outcome", default="Recovered", help="COLUMN[:SUCCESS]")
        p.add_argument("--counts", action="store_true", help="input has a 'count' column")
        if name == "analyze":
            p.add_argument("--strata", default="", help="comma-separated column names")
        else:
            p.add_argument("--max-subset-size", type=int, default=2)
        p.set_defaults(func=func)

    p = sub.add_parser("generate", parents=[common], help="build the network and certify the reversal")
    _add_spec_args(p)
    p.add_argument("--npt-out", help="write the Recovered NPT as CSV")
    p.add_argument("--spec-out", help="write the resolved spec as JSON")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("infer", parents=[common], help="exact recovery probability")
    _add_spec_args(p)
    p.add_argument("--case", type=int, choices=(1, 2), required=True)
    p.add_argument("--xn", type=_parse_bool)
    p.add_argument("--d", type=_parse_bool)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("simulate", parents=[common], help="sample a synthetic trial to CSV")
    _add_spec_args(p)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("design", parents=[common], help="control-group counts and allocation")
    p.add_argument("factors", nargs="*", help="NAME:CARDINALITY or NAME:STATE,STATE,...")
    p.add_argument("--spec", help="DesignSpec JSON file")
    p.add_argument("--min-per-group", type=int)
    p.add_argument("--total", type=int)
    p.add_argument("--plan-out", help="write the materialized plan as CSV")
    p.set_defaults(func=cmd_design)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        report = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=stderr)
        return EXIT_DATA
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    print(report.render(), file=stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
