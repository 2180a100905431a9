"""Problem model for multi-issue allocation with crossed claims.

A problem has a list of issues (divisible resources with a capacity) and a
list of claimants.  Each claimant holds one claim that draws jointly on a
set of issues.  All quantities are :class:`fractions.Fraction`; nothing in
this package ever rounds.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any

Allocation = dict[str, Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


class ProblemError(ValueError):
    """Raised when a problem document or object is structurally invalid."""

    def __init__(self, report: ValidationReport):
        self.report = report
        lines = "; ".join(f"{v.code}: {v.message}" for v in report.errors + report.warnings)
        super().__init__(lines or "invalid problem")


class AllocationError(ValueError):
    """An allocation does not match the problem it is evaluated against."""


def as_fraction(value: Any) -> Fraction:
    """Parse an exact amount: an int, a Fraction, or an ``"p"`` / ``"p/q"`` string.

    Floats (and decimal strings such as ``"1.5"``) are rejected so that no
    binary rounding can sneak into a problem.
    """
    if isinstance(value, bool):
        raise ValueError(f"not an exact amount: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        num, sep, den = text.partition("/")
        try:
            if not sep:
                return Fraction(int(num))
            return Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError):
            pass
    raise ValueError(f"not an exact amount: {value!r}")


def format_fraction(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Issue:
    id: str
    amount: Fraction


@dataclass(frozen=True)
class Claimant:
    id: str
    claim: Fraction
    issues: frozenset[str]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    ref: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "ref": self.ref}


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_problem`.

    ``problem`` is set whenever there are no fatal ``errors``; non-binding
    issues only produce ``warnings``.
    """

    problem: Problem | None = None
    errors: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.problem is not None and not self.errors and not self.warnings

    def to_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "errors": [v.to_dict() for v in self.errors],
            "warnings": [v.to_dict() for v in self.warnings],
        }


def _structural_violations(issues: Iterable[Issue], claimants: Iterable[Claimant]) -> list[Violation]:
    out: list[Violation] = []
    seen_issues: set[str] = set()
    for issue in issues:
        if issue.id in seen_issues:
            out.append(Violation("E_DUPLICATE_ISSUE", f"issue id {issue.id!r} declared twice", issue.id))
        seen_issues.add(issue.id)
        if issue.amount < 0:
            out.append(Violation("E_NEGATIVE_AMOUNT", f"issue {issue.id!r} has negative amount", issue.id))
    seen_claimants: set[str] = set()
    for c in claimants:
        if c.id in seen_claimants:
            out.append(Violation("E_DUPLICATE_CLAIMANT", f"claimant id {c.id!r} declared twice", c.id))
        seen_claimants.add(c.id)
        if c.claim < 0:
            out.append(Violation("E_NEGATIVE_AMOUNT", f"claimant {c.id!r} has negative claim", c.id))
        if not c.issues:
            out.append(Violation("E_EMPTY_ISSUE_SET", f"claimant {c.id!r} claims no issue", c.id))
        for i in sorted(c.issues - seen_issues):
            out.append(Violation("E_UNKNOWN_ISSUE", f"claimant {c.id!r} refers to unknown issue {i!r}", c.id))
    return out


@dataclass(frozen=True)
class Problem:
    """The tuple (issues, claimants, capacities, claims, claim map).

    Construction enforces structure only (unique ids, known non-empty issue
    sets, non-negative amounts).  Whether every issue is over-claimed is a
    separate question answered by :func:`validate_problem`, since reduced
    problems built for consistency checks may legitimately violate it.
    """

    issues: tuple[Issue, ...]
    claimants: tuple[Claimant, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "issues", tuple(self.issues))
        object.__setattr__(self, "claimants", tuple(self.claimants))
        errors = _structural_violations(self.issues, self.claimants)
        if errors:
            raise ProblemError(ValidationReport(errors=errors))

    @classmethod
    def build(
        cls,
        issues: Mapping[str, Any],
        claimants: Iterable[tuple[str, Any, Iterable[str]]],
    ) -> Problem:
        """Shorthand constructor: ``Problem.build({"E1": 10}, [("C1", 8, ["E1"])])``."""
        return cls(
            tuple(Issue(i, as_fraction(a)) for i, a in issues.items()),
            tuple(Claimant(j, as_fraction(c), frozenset(s)) for j, c, s in claimants),
        )

    @cached_property
    def issue_ids(self) -> tuple[str, ...]:
        return tuple(i.id for i in self.issues)

    @cached_property
    def claimant_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.claimants)

    @cached_property
    def capacity(self) -> dict[str, Fraction]:
        return {i.id: i.amount for i in self.issues}

    @cached_property
    def claim(self) -> dict[str, Fraction]:
        return {c.id: c.claim for c in self.claimants}

    @cached_property
    def alpha(self) -> dict[str, frozenset[str]]:
        return {c.id: c.issues for c in self.claimants}

    @cached_property
    def claimants_of(self) -> dict[str, tuple[str, ...]]:
        """Issue id -> ids of the claimants whose claim draws on it, in declaration order."""
        out: dict[str, list[str]] = {i: [] for i in self.issue_ids}
        for c in self.claimants:
            for i in c.issues:
                out[i].append(c.id)
        return {i: tuple(js) for i, js in out.items()}

    def total_claim(self, issue_id: str) -> Fraction:
        return sum((self.claim[j] for j in self.claimants_of[issue_id]), ZERO)

    def nonbinding_issues(self) -> list[str]:
        return [i.id for i in self.issues if self.total_claim(i.id) <= i.amount]

    def zero_allocation(self) -> Allocation:
        return {j: ZERO for j in self.claimant_ids}


def _parse_document(raw: Mapping[str, Any]) -> tuple[list[Issue], list[Claimant], list[Violation]]:
    errors: list[Violation] = []
    if not isinstance(raw, Mapping):
        return [], [], [Violation("E_SCHEMA", "problem document must be a JSON object")]
    for key in ("issues", "claimants"):
        if key not in raw:
            errors.append(Violation("E_SCHEMA", f"missing key {key!r}"))
        elif not isinstance(raw[key], list):
            errors.append(Violation("E_SCHEMA", f"{key!r} must be a list"))
    if errors:
        return [], [], errors

    issues: list[Issue] = []
    for n, item in enumerate(raw["issues"]):
        if not isinstance(item, Mapping) or not isinstance(item.get("id"), str) or "amount" not in item:
            errors.append(Violation("E_SCHEMA", f"issues[{n}] needs a string 'id' and an 'amount'"))
            continue
        try:
            issues.append(Issue(item["id"], as_fraction(item["amount"])))
        except ValueError as exc:
            errors.append(Violation("E_BAD_AMOUNT", str(exc), item["id"]))

    claimants: list[Claimant] = []
    for n, item in enumerate(raw["claimants"]):
        if (
            not isinstance(item, Mapping)
            or not isinstance(item.get("id"), str)
            or "claim" not in item
            or not isinstance(item.get("issues"), list)
            or not all(isinstance(i, str) for i in item["issues"])
        ):
            errors.append(
                Violation("E_SCHEMA", f"claimants[{n}] needs a string 'id', a 'claim' and an 'issues' list")
            )
            continue
        try:
            claim = as_fraction(item["claim"])
        except ValueError as exc:
            errors.append(Violation("E_BAD_AMOUNT", str(exc), item["id"]))
            continue
        if len(set(item["issues"])) != len(item["issues"]):
            errors.append(Violation("E_SCHEMA", f"claimant {item['id']!r} lists an issue twice", item["id"]))
        claimants.append(Claimant(item["id"], claim, frozenset(item["issues"])))
    return issues, claimants, errors


def validate_problem(raw: Mapping[str, Any] | Problem) -> ValidationReport:
    """Validate a problem document (or an already-built :class:`Problem`).

    Every violation is collected rather than stopping at the first one.
    Structural problems are errors; issues whose total claim does not exceed
    their capacity are warnings (see :func:`normalize`).
    """
    if isinstance(raw, Problem):
        issues, claimants, errors = list(raw.issues), list(raw.claimants), []
    else:
        issues, claimants, errors = _parse_document(raw)
        errors += _structural_violations(issues, claimants)
    report = ValidationReport(errors=errors)
    if errors:
        return report
    problem = raw if isinstance(raw, Problem) else Problem(tuple(issues), tuple(claimants))
    report.problem = problem
    for i in problem.nonbinding_issues():
        report.warnings.append(
            Violation(
                "W_NONBINDING_ISSUE",
                f"issue {i!r}: total claim {format_fraction(problem.total_claim(i))} "
                f"does not exceed capacity {format_fraction(problem.capacity[i])}",
                i,
            )
        )
    return report


@dataclass(frozen=True)
class Normalized:
    """Result of :func:`normalize`.

    ``unconstrained`` holds claimants whose every issue was removed; they are
    owed their full claim and take no further part in the computation.
    """

    problem: Problem
    removed_issues: tuple[str, ...]
    unconstrained: dict[str, Fraction]

    @property
    def trivial(self) -> bool:
        return not self.problem.claimants

    def complete(self, allocation: Mapping[str, Fraction], order: Iterable[str]) -> Allocation:
        """Merge an allocation of the normalized problem back onto the original claimant order."""
        merged = {**allocation, **self.unconstrained}
        return {j: merged[j] for j in order}


def normalize(problem: Problem) -> Normalized:
    removed = set(problem.nonbinding_issues())
    if not removed:
        return Normalized(problem, (), {})
    issues = tuple(i for i in problem.issues if i.id not in removed)
    kept: list[Claimant] = []
    unconstrained: dict[str, Fraction] = {}
    for c in problem.claimants:
        rest = c.issues - removed
        if rest:
            kept.append(Claimant(c.id, c.claim, rest))
        else:
            unconstrained[c.id] = c.claim
    return Normalized(
        Problem(issues, tuple(kept)),
        tuple(i for i in problem.issue_ids if i in removed),
        unconstrained,
    )


def load_problem(raw: Mapping[str, Any] | Problem, *, allow_nonbinding: bool = False) -> Problem:
    """Validate and return a problem, raising :class:`ProblemError` on any violation.

    Non-binding issues are rejected unless ``allow_nonbinding`` is set.
    """
    report = validate_problem(raw)
    if report.errors or report.problem is None:
        raise ProblemError(report)
    if report.warnings and not allow_nonbinding:
        raise ProblemError(report)
    return report.problem


def _check_domain(problem: Problem, x: Mapping[str, Fraction]) -> None:
    if set(x) != set(problem.claimant_ids):
        missing = sorted(set(problem.claimant_ids) - set(x))
        extra = sorted(set(x) - set(problem.claimant_ids))
        raise AllocationError(f"allocation domain mismatch (missing {missing}, unexpected {extra})")


def issue_load(problem: Problem, x: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Total award charged against each issue."""
    return {i: sum((x[j] for j in js), ZERO) for i, js in problem.claimants_of.items()}


def is_feasible(problem: Problem, x: Mapping[str, Fraction]) -> bool:
    _check_domain(problem, x)
    if any(not (ZERO <= x[c.id] <= c.claim) for c in problem.claimants):
        return False
    load = issue_load(problem, x)
    return all(load[i.id] <= i.amount for i in problem.issues)


def improvable_claimants(problem: Problem, x: Mapping[str, Fraction]) -> list[str]:
    """Claimants whose award alone could be raised without breaking feasibility."""
    load = issue_load(problem, x)
    slack = {i.id: i.amount - load[i.id] for i in problem.issues}
    return [c.id for c in problem.claimants if x[c.id] < c.claim and all(slack[i] > 0 for i in c.issues)]


def is_pareto_efficient(problem: Problem, x: Mapping[str, Fraction]) -> bool:
    # Every constraint is a monotone sum, so x is dominated iff a single
    # coordinate can be raised.
    if not is_feasible(problem, x):
        raise AllocationError("Pareto efficiency is only defined for feasible allocations")
    return not improvable_claimants(problem, x)


def are_equal(problem: Problem, j: str, k: str) -> tuple[bool, bool]:
    """Return ``(homologous, equal)`` for claimants ``j`` and ``k``."""
    try:
        homologous = problem.alpha[j] == problem.alpha[k]
    except KeyError as exc:
        raise KeyError(f"unknown claimant {exc.args[0]!r}") from None
    return homologous, homologous and problem.claim[j] == problem.claim[k]
