"""Allocation rules behind a uniform callable interface.

Besides CPA this module holds the proportional rule for single-issue
problems and the rules used to show that the axioms characterizing CPA are
independent of each other: each of them breaks exactly one axiom.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

from .core import ONE, ZERO, Allocation, Claimant, Issue, Problem
from .cpa import cpa, max_uniform_factor

if TYPE_CHECKING:
    from .axioms import MergeSpec, SplitSpec


def _proportional(claims: dict[str, Fraction], amount: Fraction) -> Allocation:
    total = sum(claims.values(), ZERO)
    if total == 0:
        return {j: ZERO for j in claims}
    ratio = min(ONE, amount / total)
    return {j: ratio * c for j, c in claims.items()}


def solve_prop_single(problem: Problem) -> Allocation:
    """Proportional rule ``x_j = c_j / sum(c) * e`` on a one-issue problem.

    If the issue is not over-claimed (possible for reduced problems) every
    claimant simply gets its claim.
    """
    if len(problem.issues) != 1:
        raise ValueError(f"proportional rule needs exactly one issue, got {len(problem.issues)}")
    return _proportional(dict(problem.claim), problem.issues[0].amount)


def solve_null(problem: Problem) -> Allocation:
    return problem.zero_allocation()


def solve_priority(problem: Problem, order: Sequence[str] | None = None) -> Allocation:
    """Serve claimants one at a time, each as much as its claim and its issues allow."""
    if order is None:
        order = problem.claimant_ids
    if sorted(order) != sorted(problem.claimant_ids):
        raise ValueError("priority order must be a permutation of the claimants")
    e = dict(problem.capacity)
    x = problem.zero_allocation()
    for j in order:
        award = min([problem.claim[j]] + [e[i] for i in problem.alpha[j]])
        x[j] = award
        for i in problem.alpha[j]:
            e[i] -= award
    return x


def solve_two_phase(problem: Problem) -> Allocation:
    """Serve single-issue claimants first, then run CPA for everyone else.

    Phase one splits each issue proportionally among the claimants that
    claim only that issue.  Phase two charges those awards against the
    capacities and applies CPA to the remaining claimants.
    """
    x = problem.zero_allocation()
    e = dict(problem.capacity)
    for i in problem.issue_ids:
        exclusive = {j: problem.claim[j] for j in problem.claimants_of[i] if problem.alpha[j] == {i}}
        if exclusive:
            for j, a in _proportional(exclusive, e[i]).items():
                x[j] = a
                e[i] -= a
    rest = tuple(c for c in problem.claimants if len(c.issues) > 1)
    if rest:
        used = set().union(*(c.issues for c in rest))
        sub = Problem(tuple(Issue(i, e[i]) for i in problem.issue_ids if i in used), rest)
        x.update(cpa(sub))
    return x


def guaranteed_minimum(problem: Problem, single_issue_rule: Callable[[Problem], Allocation]) -> Allocation:
    """Per claimant, the smallest award ``single_issue_rule`` gives it over its issues taken one at a time."""
    floors: dict[str, Fraction] = {}
    for i in problem.issue_ids:
        members = problem.claimants_of[i]
        if not members:
            continue
        sub = single_issue_subproblem(problem, i)
        for j, a in single_issue_rule(sub).items():
            floors[j] = a if j not in floors else min(floors[j], a)
    return {j: floors[j] for j in problem.claimant_ids}


def single_issue_subproblem(problem: Problem, issue_id: str) -> Problem:
    members = problem.claimants_of[issue_id]
    return Problem(
        (Issue(issue_id, problem.capacity[issue_id]),),
        tuple(Claimant(j, problem.claim[j], frozenset({issue_id})) for j in members),
    )


def solve_two_step(problem: Problem) -> Allocation:
    """Guaranteed minimum first, then issue-by-issue proportional top-up.

    Step one pays every claimant the minimum of its proportional shares in
    the one-issue subproblems.  Those floors never overdraw an issue: each is
    at most the claimant's proportional share of that issue, and the shares
    of an issue add up to at most its capacity.

    Step two visits the issues from the smallest residual capacity to the
    largest (declaration order breaks ties).  At each issue the claimants on
    it that still have a residual claim and no dry issue are scaled up
    proportionally, repeatedly and by the largest factor every capacity
    allows, until the issue is dry or none of its claimants can take more.
    """
    x = guaranteed_minimum(problem, solve_prop_single)
    e = dict(problem.capacity)
    c = dict(problem.claim)
    for j, a in x.items():
        c[j] -= a
        for i in problem.alpha[j]:
            e[i] -= a

    for i in sorted(problem.issue_ids, key=lambda i: e[i]):
        while e[i] > 0:
            active = [j for j in problem.claimants_of[i] if c[j] > 0 and all(e[k] > 0 for k in problem.alpha[j])]
            if not active:
                break
            demand: dict[str, Fraction] = {}
            for j in active:
                for k in problem.alpha[j]:
                    demand[k] = demand.get(k, ZERO) + c[j]
            lam = max_uniform_factor(e, demand)
            for j in active:
                a = lam * c[j]
                x[j] += a
                c[j] -= a
            for k, d in demand.items():
                e[k] -= lam * d
    return x


def solve_cea_mac(problem: Problem) -> Allocation:
    """Egalitarian counterpart of CPA (reconstructed, not a published definition).

    Each step gives every active claimant the same amount: the largest
    equal increment that no active issue and no residual claim can refuse.
    """
    e = dict(problem.capacity)
    c = dict(problem.claim)
    x = problem.zero_allocation()
    while True:
        active = [j for j in problem.claimant_ids if c[j] > 0 and all(e[i] > 0 for i in problem.alpha[j])]
        if not active:
            return x
        heads: dict[str, int] = {}
        for j in active:
            for i in problem.alpha[j]:
                heads[i] = heads.get(i, 0) + 1
        delta = min(min(e[i] / n for i, n in heads.items()), min(c[j] for j in active))
        for j in active:
            x[j] += delta
            c[j] -= delta
        for i, n in heads.items():
            e[i] -= n * delta


@dataclass(frozen=True)
class Rule:
    """A named rule.  Calling it on a problem returns an allocation.

    ``after_split`` and ``after_merge`` return the rule to apply to a
    transformed problem; only rules with parameters tied to claimant ids
    (the priority rule) need to adapt.
    """

    name: str
    func: Callable[[Problem], Allocation]
    reconstructed: bool = False

    def __call__(self, problem: Problem) -> Allocation:
        return self.func(problem)

    def after_split(self, spec: SplitSpec) -> Rule:
        return self

    def after_merge(self, spec: MergeSpec) -> Rule:
        return self

    def describe(self) -> dict:
        return {"name": self.name, "reconstructed": self.reconstructed}


@dataclass(frozen=True)
class PriorityRule(Rule):
    """Priority rule with an explicit claimant order.

    Claimants missing from ``order`` (e.g. in a problem unrelated to the
    order) are served afterwards in declaration order; claimants of the
    order missing from the problem are skipped, which is what restricting
    to a reduced problem needs.
    """

    name: str = "priority"
    func: Callable[[Problem], Allocation] = field(default=solve_priority, repr=False)
    order: tuple[str, ...] | None = None

    def __call__(self, problem: Problem) -> Allocation:
        if self.order is None:
            return solve_priority(problem)
        present = set(problem.claimant_ids)
        listed = [j for j in self.order if j in present]
        seen = set(listed)
        listed += [j for j in problem.claimant_ids if j not in seen]
        return solve_priority(problem, listed)

    def after_split(self, spec: SplitSpec) -> Rule:
        if self.order is None:
            return self
        new: list[str] = []
        for j in self.order:
            if j == spec.target:
                new.extend(p for p, _ in spec.parts)
            else:
                new.append(j)
        return PriorityRule(order=tuple(new))

    def after_merge(self, spec: MergeSpec) -> Rule:
        if self.order is None:
            return self
        sources = set(spec.sources)
        new: list[str] = []
        for j in self.order:
            if j in sources:
                if spec.merged_id not in new:
                    new.append(spec.merged_id)
            else:
                new.append(j)
        return PriorityRule(order=tuple(new))

    def describe(self) -> dict:
        return {**super().describe(), "order": list(self.order) if self.order is not None else None}


CPA = Rule("cpa", cpa)
PROP = Rule("prop", solve_prop_single)
NULL = Rule("null", solve_null)
PRIORITY = PriorityRule()
TWO_PHASE = Rule("two-phase", solve_two_phase)
TWO_STEP = Rule("two-step", solve_two_step)
CEA_MAC = Rule("cea", solve_cea_mac, reconstructed=True)

RULES: dict[str, Rule] = {r.name: r for r in (CPA, PROP, NULL, PRIORITY, TWO_PHASE, TWO_STEP, CEA_MAC)}


def get_rule(name: str, order: Sequence[str] | None = None) -> Rule:
    key = name.lower().replace("_", "-")
    aliases = {"prop-single": "prop", "cea-mac": "cea"}
    key = aliases.get(key, key)
    if key not in RULES:
        raise KeyError(f"unknown rule {name!r}; choose from {sorted(RULES)}")
    if order is not None:
        if key != "priority":
            raise ValueError("an order only applies to the priority rule")
        return PriorityRule(order=tuple(order))
    return RULES[key]
