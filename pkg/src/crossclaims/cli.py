"""Command-line interface.

Exit codes: 0 success, 1 an axiom or rule-contract violation was found
(the witness is in the output document), 2 bad input or usage.  Error
documents go to stderr as JSON with a machine-readable ``code``.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

from .axioms import (
    CHECKERS,
    MergeSpec,
    RuleContractError,
    SplitSpec,
    SubsetSpec,
    check,
    fuzz_axiom,
    merge_problem,
    reduce_problem,
    split_problem,
    verify_witness,
)
from .core import ProblemError, as_fraction, normalize, validate_problem
from .cpa import decompose, solve_cpa
from .documents import (
    allocation_from_doc,
    allocation_to_doc,
    dumps,
    envelope,
    problem_to_doc,
    trace_to_doc,
    verdict_to_doc,
    witness_from_doc,
    witness_to_doc,
)
from .gen import GenParams, gen_problem
from .rules import RULES, get_rule

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    def __init__(self, code: str, message: str, details: Any = None):
        super().__init__(message)
        self.code = code
        self.details = details


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise InputError("E_USAGE", message)


def _range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        bounds = (int(lo), int(hi if sep else lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO..HI, got {text!r}") from None
    return bounds


def _csv(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _read_json(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError("E_IO", f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("E_JSON", f"{path}: {exc}") from None


def _load(path: str, allow_nonbinding: bool = False):
    report = validate_problem(_read_json(path))
    if report.errors or report.problem is None:
        raise InputError(report.errors[0].code, "invalid problem", report.to_dict())
    if report.warnings and not allow_nonbinding:
        raise InputError(report.warnings[0].code, "problem has non-binding issues (use --normalize)", report.to_dict())
    return report.problem


def _rule(args: argparse.Namespace):
    try:
        return get_rule(args.rule, _csv(args.order) if getattr(args, "order", None) else None)
    except (KeyError, ValueError) as exc:
        raise InputError("E_RULE", str(exc.args[0])) from None


def _emit(doc: Any, args: argparse.Namespace) -> None:
    text = dumps(doc)
    if getattr(args, "output", None):
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_solve(args: argparse.Namespace) -> int:
    problem = _load(args.input, allow_nonbinding=args.normalize)
    rule = _rule(args)
    normalized = normalize(problem) if args.normalize else None
    target = normalized.problem if normalized else problem
    if rule.name == "prop" and len(target.issues) != 1:
        raise InputError("E_RULE", "the proportional rule needs a single-issue problem")
    trace = None
    if rule.name == "cpa":
        x, trace = solve_cpa(target)
    else:
        x = rule(target)
    if normalized:
        x = normalized.complete(x, problem.claimant_ids)
    body: dict[str, Any] = {"rule": rule.describe(), "allocation": allocation_to_doc(x)}
    if normalized:
        body["normalized"] = {
            "removed_issues": list(normalized.removed_issues),
            "unconstrained": allocation_to_doc(normalized.unconstrained),
        }
    if args.trace:
        if trace is None:
            raise InputError("E_USAGE", "--trace is only available for --rule cpa")
        body["trace"] = trace_to_doc(trace)
    _emit(envelope("allocation", problem, **body), args)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    rule = _rule(args)
    if args.replay:
        try:
            witness = witness_from_doc(_read_json(args.replay))
        except (KeyError, ValueError, ProblemError) as exc:
            raise InputError("E_WITNESS", f"unreadable witness: {exc}") from None
        reproduced = verify_witness(rule, witness)
        doc = envelope("replay", witness.problem, rule=rule.describe(), axiom=witness.axiom, reproduced=reproduced)
        _emit(doc, args)
        return EXIT_VIOLATION if reproduced else EXIT_OK

    if not args.axiom:
        raise InputError("E_USAGE", "--axiom is required unless --replay is given")
    axiom = args.axiom.lower()
    if axiom not in CHECKERS:
        raise InputError("E_AXIOM", f"unknown axiom {args.axiom!r}; choose from {sorted(CHECKERS)}")
    try:
        if args.input:
            problem = _load(args.input)
            verdict = check(rule, axiom, problem, seed=args.seed)
            doc = envelope("verdict", problem, rule=rule.describe(), **verdict_to_doc(verdict))
            _emit(doc, args)
            return EXIT_OK if verdict.holds else EXIT_VIOLATION
        if args.budget < 1:
            raise InputError("E_USAGE", "--budget must be at least 1")
        params = GenParams(claimants=args.claimants, issues=args.issues, density=args.density)
        witness = fuzz_axiom(rule, axiom, params, budget=args.budget, seed=args.seed)
    except RuleContractError as exc:
        _emit(envelope("contract-violation", rule=rule.describe(), axiom=axiom, message=str(exc)), args)
        return EXIT_VIOLATION
    doc = envelope(
        "fuzz",
        rule=rule.describe(),
        axiom=axiom,
        budget=args.budget,
        seed=args.seed,
        holds=witness is None,
        witness=witness_to_doc(witness) if witness else None,
    )
    _emit(doc, args)
    return EXIT_OK if witness is None else EXIT_VIOLATION


def cmd_reduce(args: argparse.Namespace) -> int:
    problem = _load(args.input)
    if args.allocation:
        x = allocation_from_doc(_read_json(args.allocation).get("allocation", {}))
    else:
        x = _rule(args)(problem)
    try:
        reduced = reduce_problem(problem, x, SubsetSpec(tuple(_csv(args.keep))))
    except (ValueError, KeyError) as exc:
        raise InputError("E_TRANSFORM", str(exc)) from None
    _emit(problem_to_doc(reduced), args)
    return EXIT_OK


def cmd_split(args: argparse.Namespace) -> int:
    problem = _load(args.input)
    try:
        parts = []
        for item in _csv(args.parts):
            pid, _, claim = item.partition("=")
            parts.append((pid, as_fraction(claim)))
        out = split_problem(problem, SplitSpec(args.target, tuple(parts)))
    except ValueError as exc:
        raise InputError("E_TRANSFORM", str(exc)) from None
    _emit(problem_to_doc(out), args)
    return EXIT_OK


def cmd_merge(args: argparse.Namespace) -> int:
    problem = _load(args.input)
    sources = _csv(args.sources)
    try:
        out = merge_problem(problem, MergeSpec(tuple(sources), args.into or sources[0]))
    except (ValueError, IndexError) as exc:
        raise InputError("E_TRANSFORM", str(exc)) from None
    _emit(problem_to_doc(out), args)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        params = GenParams(
            claimants=args.claimants,
            issues=args.issues,
            density=args.density,
            max_claim=args.max_claim,
            max_denominator=args.max_den,
            duplicate_rate=args.duplicate_rate,
            seed=args.seed,
        )
    except ValueError as exc:
        raise InputError("E_USAGE", str(exc)) from None
    _emit(problem_to_doc(gen_problem(params)), args)
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace) -> int:
    problem = _load(args.input)
    parts = decompose(problem)
    _emit(envelope("components", problem, components=[problem_to_doc(p) for p in parts]), args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crossclaims", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    rule_names = sorted(RULES)

    p = sub.add_parser("solve", help="apply a rule to a problem")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--rule", default="cpa", choices=rule_names)
    p.add_argument("--order", help="priority order, e.g. C3,C1,C2")
    p.add_argument("--trace", action="store_true", help="include the CPA step trace")
    p.add_argument("--normalize", action="store_true", help="drop non-binding issues first")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="check an axiom on a problem, fuzz for a violation, or replay a witness")
    p.add_argument("--rule", default="cpa", choices=rule_names)
    p.add_argument("--order")
    p.add_argument("--axiom", type=str.lower)
    p.add_argument("-i", "--input")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--claimants", type=_range, default=(2, 8))
    p.add_argument("--issues", type=_range, default=(1, 5))
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--replay")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="reduced problem left to a subset of claimants")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--keep", required=True)
    p.add_argument("--rule", default="cpa", choices=rule_names)
    p.add_argument("--order")
    p.add_argument("--allocation", help="allocation document to reduce with instead of running --rule")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("split", help="split one claimant into several")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--parts", required=True, help="e.g. C1a=5,C1b=3")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("merge", help="merge homologous claimants")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--sources", required=True)
    p.add_argument("--into", help="merged claimant id (default: first source)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("gen", help="generate a random valid problem")
    p.add_argument("--claimants", type=_range, default=(3, 10))
    p.add_argument("--issues", type=_range, default=(1, 5))
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--max-claim", type=int, default=20)
    p.add_argument("--max-den", type=int, default=64)
    p.add_argument("--duplicate-rate", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", help="split a problem into independent components")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InputError as exc:
        error = {"code": exc.code, "message": str(exc)}
        if exc.details is not None:
            error["details"] = exc.details
        sys.stderr.write(dumps(envelope("error", error=error)))
        return EXIT_INPUT


run_cli = main

if __name__ == "__main__":
    sys.exit(main())
