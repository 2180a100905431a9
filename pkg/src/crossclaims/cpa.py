"""Constrained proportional awards (CPA).

At every step all active claimants receive the same fraction ``lam`` of
their residual claims, where ``lam`` is the largest factor no active issue
can refuse (capped at 1).  Issues that run dry and claimants that are paid
in full or blocked by a dry issue drop out, and the step repeats.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .core import ONE, ZERO, Allocation, Claimant, Problem

# Cause labels for deactivation records.
ISSUE_EXHAUSTED = "issue-exhausted"
CLAIM_EXHAUSTED = "claim-exhausted"
BLOCKED = "blocked"
NEVER_ACTIVE = 0


def max_uniform_factor(capacity: Mapping[str, Fraction], demand: Mapping[str, Fraction]) -> Fraction:
    """Largest ``lam`` in [0, 1] with ``lam * demand[i] <= capacity[i]`` for every issue.

    Issues with zero demand impose no bound.
    """
    lam = ONE
    for i, d in demand.items():
        if d > 0:
            bound = capacity[i] / d
            if bound < lam:
                lam = bound
    return lam


@dataclass
class StepRecord:
    index: int
    active_issues: tuple[str, ...]
    active_claimants: tuple[str, ...]
    lam: Fraction
    # None stands for an unbounded per-issue factor (no active demand).
    per_issue_lambda: dict[str, Fraction | None]
    increments: dict[str, Fraction]
    rho_after: Fraction
    deactivated_issues: tuple[str, ...]
    deactivated_claimants: dict[str, str]


@dataclass
class Trace:
    steps: list[StepRecord]
    final_allocation: Allocation
    leftover: dict[str, Fraction]
    issue_ids: tuple[str, ...] = ()
    claimant_ids: tuple[str, ...] = ()

    @property
    def lambdas(self) -> list[Fraction]:
        return [s.lam for s in self.steps]


def _active_claimants(claimants: Iterable[Claimant], c: Mapping[str, Fraction], e: Mapping[str, Fraction]) -> list[str]:
    return [cl.id for cl in claimants if c[cl.id] > 0 and all(e[i] > 0 for i in cl.issues)]


def solve_cpa(problem: Problem) -> tuple[Allocation, Trace]:
    """Run the CPA procedure and return the allocation together with its trace.

    Residual capacities and claims are only charged for active claimants;
    a blocked claimant's residual claim is frozen, since it receives nothing.
    """
    e = dict(problem.capacity)
    c = dict(problem.claim)
    x = problem.zero_allocation()
    steps: list[StepRecord] = []
    rho = ZERO

    active_i = [i for i in problem.issue_ids if e[i] > 0]
    active_n = _active_claimants(problem.claimants, c, e)
    s = 0
    while active_i and active_n:
        s += 1
        demand = {i: ZERO for i in active_i}
        for j in active_n:
            for i in problem.alpha[j]:
                demand[i] += c[j]
        per_issue = {i: (e[i] / d if d > 0 else None) for i, d in demand.items()}
        lam = max_uniform_factor(e, demand)

        increments = {}
        for j in active_n:
            a = lam * c[j]
            increments[j] = a
            x[j] += a
            c[j] -= a
        for i, d in demand.items():
            e[i] -= lam * d
        rho = ONE - (ONE - rho) * (ONE - lam)

        next_i = [i for i in active_i if e[i] > 0]
        next_n = _active_claimants((cl for cl in problem.claimants if cl.id in increments), c, e)
        dropped_i = tuple(i for i in active_i if e[i] == 0)
        kept_n = set(next_n)
        dropped_n = {}
        for j in active_n:
            if j in kept_n:
                continue
            dropped_n[j] = CLAIM_EXHAUSTED if c[j] == 0 else ISSUE_EXHAUSTED
        steps.append(
            StepRecord(
                index=s,
                active_issues=tuple(active_i),
                active_claimants=tuple(active_n),
                lam=lam,
                per_issue_lambda=per_issue,
                increments=increments,
                rho_after=rho,
                deactivated_issues=dropped_i,
                deactivated_claimants=dropped_n,
            )
        )
        active_i, active_n = next_i, next_n

    leftover = {i: e[i] for i in problem.issue_ids}
    trace = Trace(steps, dict(x), leftover, problem.issue_ids, problem.claimant_ids)
    return x, trace


def cpa(problem: Problem) -> Allocation:
    return solve_cpa(problem)[0]


def decompose(problem: Problem) -> list[Problem]:
    """Split a problem into the connected components of its claimant-issue graph.

    Components are ordered by their first claimant (or, for issues nobody
    claims, their first issue) in declaration order; within a component the
    original declaration order is kept.
    """
    parent: dict[str, str] = {}

    def find(node: str) -> str:
        while parent[node] != node:
            parent[node] = parent[parent[node]]
            node = parent[node]
        return node

    for i in problem.issue_ids:
        parent["i:" + i] = "i:" + i
    for cl in problem.claimants:
        parent["c:" + cl.id] = "c:" + cl.id
        for i in cl.issues:
            a, b = find("c:" + cl.id), find("i:" + i)
            if a != b:
                parent[a] = b

    groups: dict[str, tuple[list, list]] = {}
    order: list[str] = []
    for cl in problem.claimants:
        root = find("c:" + cl.id)
        if root not in groups:
            groups[root] = ([], [])
            order.append(root)
        groups[root][1].append(cl)
    for issue in problem.issues:
        root = find("i:" + issue.id)
        if root not in groups:
            groups[root] = ([], [])
            order.append(root)
        groups[root][0].append(issue)
    return [Problem(tuple(groups[r][0]), tuple(groups[r][1])) for r in order]


@dataclass
class PrecedenceOrder:
    """Deactivation step of every issue and claimant in a CPA run.

    Step 0 marks entities that were never active; ``None`` marks entities
    still active when the procedure stopped (they survived).
    """

    issue_step: dict[str, int | None] = field(default_factory=dict)
    claimant_step: dict[str, int | None] = field(default_factory=dict)
    claimant_cause: dict[str, str] = field(default_factory=dict)

    def _step(self, key: str) -> float:
        step = self.issue_step[key] if key in self.issue_step else self.claimant_step[key]
        return float("inf") if step is None else step

    def precedes(self, a: str, b: str) -> bool:
        """True when ``a`` leaves strictly before ``b``."""
        return self._step(a) < self._step(b)

    def simultaneous(self, a: str, b: str) -> bool:
        return self._step(a) == self._step(b)

    def issue_ranking(self) -> list[list[str]]:
        """Issues grouped by deactivation step, earliest first, survivors last."""
        return _rank(self.issue_step)

    def claimant_ranking(self) -> list[list[str]]:
        return _rank(self.claimant_step)


def _rank(steps: Mapping[str, int | None]) -> list[list[str]]:
    buckets: dict[float, list[str]] = {}
    for key, step in steps.items():
        buckets.setdefault(float("inf") if step is None else step, []).append(key)
    return [buckets[k] for k in sorted(buckets)]


def precedence_order(trace: Trace) -> PrecedenceOrder:
    order = PrecedenceOrder()
    for i in trace.issue_ids:
        order.issue_step[i] = NEVER_ACTIVE
    for j in trace.claimant_ids:
        order.claimant_step[j] = NEVER_ACTIVE
        order.claimant_cause[j] = BLOCKED
    for step in trace.steps:
        # Anything active in this step is at least still around; later steps overwrite.
        for i in step.active_issues:
            order.issue_step[i] = None
        for j in step.active_claimants:
            order.claimant_step[j] = None
        for i in step.deactivated_issues:
            order.issue_step[i] = step.index
        for j, cause in step.deactivated_claimants.items():
            order.claimant_step[j] = step.index
            order.claimant_cause[j] = cause
    for j, step in order.claimant_step.items():
        if step is None:
            order.claimant_cause.pop(j, None)
    return order


def rho_sequence(trace: Trace) -> list[Fraction]:
    """Cumulative share of the original claim paid out after each step."""
    out = []
    remaining = ONE
    for step in trace.steps:
        remaining *= ONE - step.lam
        out.append(ONE - remaining)
    return out
