"""JSON documents for problems, allocations, traces and witnesses.

Amounts are always written as ``"p"`` or ``"p/q"`` strings.
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Mapping
from fractions import Fraction
from typing import Any

from . import __version__
from .axioms import AxiomVerdict, Witness, spec_from_dict
from .core import Allocation, Problem, as_fraction, format_fraction, load_problem
from .cpa import PrecedenceOrder, Trace, precedence_order, rho_sequence

TOOL = "crossclaims"


def problem_to_doc(problem: Problem) -> dict[str, Any]:
    return {
        "issues": [{"id": i.id, "amount": format_fraction(i.amount)} for i in problem.issues],
        "claimants": [
            {
                "id": c.id,
                "claim": format_fraction(c.claim),
                # Issue sets are unordered; write them in issue declaration order.
                "issues": [i for i in problem.issue_ids if i in c.issues],
            }
            for c in problem.claimants
        ],
    }


def problem_from_doc(doc: Mapping[str, Any], *, allow_nonbinding: bool = False) -> Problem:
    return load_problem(doc, allow_nonbinding=allow_nonbinding)


def allocation_to_doc(x: Mapping[str, Fraction]) -> dict[str, str]:
    return {j: format_fraction(a) for j, a in x.items()}


def allocation_from_doc(doc: Mapping[str, Any]) -> Allocation:
    return {j: as_fraction(a) for j, a in doc.items()}


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def digest(problem: Problem) -> str:
    canonical = json.dumps(problem_to_doc(problem), sort_keys=True, separators=(",", ":"))
    return "sha256:" + hashlib.sha256(canonical.encode()).hexdigest()


def envelope(kind: str, problem: Problem | None = None, **body: Any) -> dict[str, Any]:
    """Common header of every output document."""
    doc: dict[str, Any] = {"kind": kind, "tool": TOOL, "version": __version__}
    if problem is not None:
        doc["input_digest"] = digest(problem)
    doc.update(body)
    return doc


def _step_label(step: int | None) -> int | str:
    return "survived" if step is None else step


def precedence_to_doc(order: PrecedenceOrder) -> dict[str, Any]:
    return {
        "issues": {i: _step_label(s) for i, s in order.issue_step.items()},
        "claimants": {j: _step_label(s) for j, s in order.claimant_step.items()},
        "claimant_causes": dict(order.claimant_cause),
        "issue_ranking": order.issue_ranking(),
        "claimant_ranking": order.claimant_ranking(),
    }


def trace_to_doc(trace: Trace) -> dict[str, Any]:
    steps = []
    for step in trace.steps:
        steps.append(
            {
                "s": step.index,
                "lambda": format_fraction(step.lam),
                "per_issue_lambda": {
                    i: ("inf" if v is None else format_fraction(v)) for i, v in step.per_issue_lambda.items()
                },
                "active_issues": list(step.active_issues),
                "active_claimants": list(step.active_claimants),
                "increments": allocation_to_doc(step.increments),
                "rho": format_fraction(step.rho_after),
                "deactivated_issues": list(step.deactivated_issues),
                "deactivated_claimants": dict(step.deactivated_claimants),
            }
        )
    return {
        "steps": steps,
        "rho": [format_fraction(r) for r in rho_sequence(trace)],
        "precedence": precedence_to_doc(precedence_order(trace)),
        "final_allocation": allocation_to_doc(trace.final_allocation),
        "leftover": allocation_to_doc(trace.leftover),
    }


def witness_to_doc(w: Witness) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "axiom": w.axiom,
        "rule": w.rule,
        "problem": problem_to_doc(w.problem),
        "claimants": list(w.claimants),
        "expected": format_fraction(w.expected),
        "actual": format_fraction(w.actual),
        "allocation": allocation_to_doc(w.allocation),
        "transformation": w.transformation.to_dict() if w.transformation is not None else None,
        "transformed_problem": problem_to_doc(w.transformed_problem) if w.transformed_problem else None,
        "transformed_allocation": (
            allocation_to_doc(w.transformed_allocation) if w.transformed_allocation is not None else None
        ),
        "trial": w.trial,
    }
    detail: dict[str, Any] = {}
    for key, value in w.detail.items():
        if isinstance(value, Mapping):
            detail[key] = {k: format_fraction(v) if isinstance(v, Fraction) else v for k, v in value.items()}
        else:
            detail[key] = value
    doc["detail"] = detail
    return doc


def witness_from_doc(doc: Mapping[str, Any]) -> Witness:
    problem = load_problem(doc["problem"], allow_nonbinding=True)
    detail: dict[str, Any] = dict(doc.get("detail") or {})
    if "dominating_allocation" in detail:
        detail["dominating_allocation"] = allocation_from_doc(detail["dominating_allocation"])
    transformation = doc.get("transformation")
    return Witness(
        axiom=doc["axiom"],
        rule=doc.get("rule", {}),
        problem=problem,
        claimants=tuple(doc.get("claimants", ())),
        expected=as_fraction(doc["expected"]),
        actual=as_fraction(doc["actual"]),
        allocation=allocation_from_doc(doc.get("allocation", {})),
        transformation=spec_from_dict(transformation) if transformation else None,
        detail=detail,
        trial=doc.get("trial"),
    )


def verdict_to_doc(verdict: AxiomVerdict) -> dict[str, Any]:
    return {
        "axiom": verdict.axiom,
        "holds": verdict.holds,
        "checked": verdict.checked,
        "notes": list(verdict.notes),
        "witness": witness_to_doc(verdict.witness) if verdict.witness is not None else None,
    }
