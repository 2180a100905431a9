"""Problem transformations and executable checks of the axioms.

Each ``check_*`` function runs a rule on a problem (and on transformed
problems where the axiom needs them) and returns an :class:`AxiomVerdict`.
A failed verdict carries a :class:`Witness` with everything needed to
replay the violation; :func:`verify_witness` replays it from scratch.

A rule that returns an infeasible allocation is not an axiom failure: the
check stops with :class:`RuleContractError` instead.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .core import (
    ZERO,
    Allocation,
    AllocationError,
    Claimant,
    Issue,
    Problem,
    improvable_claimants,
    is_feasible,
    issue_load,
)


class RuleContractError(RuntimeError):
    """A rule returned something that is not a feasible allocation."""


@dataclass(frozen=True)
class SubsetSpec:
    keep: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "keep", tuple(self.keep))
        if not self.keep:
            raise ValueError("a reduced problem needs at least one claimant")
        if len(set(self.keep)) != len(self.keep):
            raise ValueError("duplicate claimant in subset")

    def to_dict(self) -> dict[str, Any]:
        return {"type": "subset", "keep": list(self.keep)}


@dataclass(frozen=True)
class SplitSpec:
    target: str
    parts: tuple[tuple[str, Fraction], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple((p, Fraction(c)) for p, c in self.parts))
        if not self.parts:
            raise ValueError("a split needs at least one part")
        if any(c <= 0 for _, c in self.parts):
            raise ValueError("split parts must have positive claims")
        if len({p for p, _ in self.parts}) != len(self.parts):
            raise ValueError("split part ids must be distinct")

    def to_dict(self) -> dict[str, Any]:
        from .core import format_fraction

        return {
            "type": "split",
            "target": self.target,
            "parts": [{"id": p, "claim": format_fraction(c)} for p, c in self.parts],
        }


@dataclass(frozen=True)
class MergeSpec:
    sources: tuple[str, ...]
    merged_id: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", tuple(self.sources))
        if len(set(self.sources)) < 2 or len(set(self.sources)) != len(self.sources):
            raise ValueError("a merge needs at least two distinct sources")

    def to_dict(self) -> dict[str, Any]:
        return {"type": "merge", "sources": list(self.sources), "merged_id": self.merged_id}


def spec_from_dict(doc: dict[str, Any]) -> SubsetSpec | SplitSpec | MergeSpec:
    from .core import as_fraction

    kind = doc.get("type")
    if kind == "subset":
        return SubsetSpec(tuple(doc["keep"]))
    if kind == "split":
        return SplitSpec(doc["target"], tuple((p["id"], as_fraction(p["claim"])) for p in doc["parts"]))
    if kind == "merge":
        return MergeSpec(tuple(doc["sources"]), doc["merged_id"])
    raise ValueError(f"unknown transformation type {kind!r}")


def reduce_problem(problem: Problem, x: Allocation, spec: SubsetSpec) -> Problem:
    """The problem left to ``spec.keep`` once everyone else walks away with their award.

    The result is not normalized: it keeps every issue a remaining claimant
    draws on, even if that issue is no longer over-claimed.
    """
    keep = set(spec.keep)
    unknown = keep - set(problem.claimant_ids)
    if unknown:
        raise ValueError(f"unknown claimants in subset: {sorted(unknown)}")
    used: set[str] = set()
    for j in keep:
        used |= problem.alpha[j]
    issues = []
    for issue in problem.issues:
        if issue.id not in used:
            continue
        left = issue.amount - sum((x[j] for j in problem.claimants_of[issue.id] if j not in keep), ZERO)
        if left < 0:
            raise ValueError(f"departing awards exceed the capacity of issue {issue.id!r}")
        issues.append(Issue(issue.id, left))
    return Problem(tuple(issues), tuple(c for c in problem.claimants if c.id in keep))


def split_problem(problem: Problem, spec: SplitSpec) -> Problem:
    """Replace ``spec.target`` by its parts, in place, each claiming the target's issues."""
    if spec.target not in problem.claim:
        raise ValueError(f"unknown claimant {spec.target!r}")
    total = sum((c for _, c in spec.parts), ZERO)
    if total != problem.claim[spec.target]:
        raise ValueError(f"split parts sum to {total}, not to the claim {problem.claim[spec.target]}")
    others = set(problem.claimant_ids) - {spec.target}
    clash = others & {p for p, _ in spec.parts}
    if clash:
        raise ValueError(f"split part ids already in use: {sorted(clash)}")
    out: list[Claimant] = []
    for c in problem.claimants:
        if c.id == spec.target:
            out.extend(Claimant(p, claim, c.issues) for p, claim in spec.parts)
        else:
            out.append(c)
    return Problem(problem.issues, tuple(out))


def merge_problem(problem: Problem, spec: MergeSpec) -> Problem:
    """Replace homologous ``spec.sources`` by one claimant holding their summed claim.

    The merged claimant sits where the first source was.
    """
    missing = set(spec.sources) - set(problem.claimant_ids)
    if missing:
        raise ValueError(f"unknown claimants in merge: {sorted(missing)}")
    issue_sets = {problem.alpha[j] for j in spec.sources}
    if len(issue_sets) != 1:
        raise ValueError("only homologous claimants (same issue set) can merge")
    sources = set(spec.sources)
    if spec.merged_id in set(problem.claimant_ids) - sources:
        raise ValueError(f"merged id {spec.merged_id!r} already in use")
    merged = Claimant(spec.merged_id, sum((problem.claim[j] for j in spec.sources), ZERO), issue_sets.pop())
    out: list[Claimant] = []
    placed = False
    for c in problem.claimants:
        if c.id in sources:
            if not placed:
                out.append(merged)
                placed = True
        else:
            out.append(c)
    return Problem(problem.issues, tuple(out))


@dataclass
class Witness:
    """A concrete, replayable axiom violation."""

    axiom: str
    rule: dict[str, Any]
    problem: Problem
    claimants: tuple[str, ...]
    expected: Fraction
    actual: Fraction
    allocation: Allocation
    transformation: SubsetSpec | SplitSpec | MergeSpec | None = None
    transformed_problem: Problem | None = None
    transformed_allocation: Allocation | None = None
    detail: dict[str, Any] = field(default_factory=dict)
    trial: int | None = None


@dataclass
class AxiomVerdict:
    axiom: str
    holds: bool
    witness: Witness | None = None
    checked: int = 0
    notes: list[str] = field(default_factory=list)


def _run(rule: Callable[[Problem], Allocation], problem: Problem) -> Allocation:
    x = rule(problem)
    try:
        ok = is_feasible(problem, x)
    except AllocationError as exc:
        raise RuleContractError(f"{_name(rule)}: {exc}") from None
    if not ok:
        raise RuleContractError(f"{_name(rule)} returned an infeasible allocation")
    return x


def _name(rule: Any) -> str:
    return getattr(rule, "name", getattr(rule, "__name__", repr(rule)))


def _describe(rule: Any) -> dict[str, Any]:
    if hasattr(rule, "describe"):
        return rule.describe()
    return {"name": _name(rule), "reconstructed": False}


def _adapt(rule: Any, spec: SplitSpec | MergeSpec) -> Any:
    hook = "after_split" if isinstance(spec, SplitSpec) else "after_merge"
    return getattr(rule, hook, lambda _spec: rule)(spec)


def check_peff(rule, problem: Problem) -> AxiomVerdict:
    x = _run(rule, problem)
    movers = improvable_claimants(problem, x)
    if not movers:
        return AxiomVerdict("peff", True, checked=1)
    j = movers[0]
    load = issue_load(problem, x)
    room = min([problem.claim[j] - x[j]] + [problem.capacity[i] - load[i] for i in problem.alpha[j]])
    better = dict(x)
    better[j] += room
    witness = Witness(
        "peff", _describe(rule), problem, (j,), expected=better[j], actual=x[j], allocation=x,
        detail={"dominating_allocation": better},
    )
    return AxiomVerdict("peff", False, witness, checked=1)


def check_ete(rule, problem: Problem) -> AxiomVerdict:
    x = _run(rule, problem)
    ids = problem.claimant_ids
    pairs = 0
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            j, k = ids[a], ids[b]
            if problem.alpha[j] != problem.alpha[k] or problem.claim[j] != problem.claim[k]:
                continue
            pairs += 1
            if x[j] != x[k]:
                w = Witness("ete", _describe(rule), problem, (j, k), expected=x[j], actual=x[k], allocation=x)
                return AxiomVerdict("ete", False, w, checked=pairs)
    return AxiomVerdict("ete", True, checked=pairs)


def gma_floors(rule, problem: Problem) -> tuple[Allocation, dict[str, str]]:
    """Each claimant's guaranteed minimum under ``rule`` and the issue that sets it."""
    from .rules import single_issue_subproblem

    floors: dict[str, Fraction] = {}
    argmin: dict[str, str] = {}
    for i in problem.issue_ids:
        if not problem.claimants_of[i]:
            continue
        sub = single_issue_subproblem(problem, i)
        for j, a in _run(rule, sub).items():
            if j not in floors or a < floors[j]:
                floors[j] = a
                argmin[j] = i
    return {j: floors[j] for j in problem.claimant_ids}, argmin


def check_gma(rule, problem: Problem) -> AxiomVerdict:
    x = _run(rule, problem)
    floors, argmin = gma_floors(rule, problem)
    for j in problem.claimant_ids:
        if x[j] < floors[j]:
            w = Witness(
                "gma", _describe(rule), problem, (j,), expected=floors[j], actual=x[j], allocation=x,
                detail={"floor_issue": argmin[j], "floors": floors},
            )
            return AxiomVerdict("gma", False, w, checked=len(floors))
    return AxiomVerdict("gma", True, checked=len(floors))


def check_cons(rule, problem: Problem, specs: Sequence[SubsetSpec] | None = None, seed: int = 0) -> AxiomVerdict:
    if specs is None:
        from .gen import gen_specs

        specs = gen_specs(problem, "subset", len(problem.claimants) + 5, seed)
    x = _run(rule, problem)
    verdict = AxiomVerdict("cons", True)
    nonbinding = 0
    for spec in specs:
        reduced = reduce_problem(problem, x, spec)
        if reduced.nonbinding_issues():
            nonbinding += 1
        y = _run(rule, reduced)
        verdict.checked += 1
        for j in spec.keep:
            if y[j] != x[j]:
                verdict.holds = False
                verdict.witness = Witness(
                    "cons", _describe(rule), problem, (j,), expected=x[j], actual=y[j], allocation=x,
                    transformation=spec, transformed_problem=reduced, transformed_allocation=y,
                )
                break
        if not verdict.holds:
            break
    if nonbinding:
        verdict.notes.append(f"{nonbinding} reduced problem(s) had non-binding issues; evaluated as-is")
    return verdict


def check_nms(rule, problem: Problem, specs: Sequence[SplitSpec] | None = None, seed: int = 0) -> AxiomVerdict:
    if specs is None:
        from .gen import gen_specs

        specs = gen_specs(problem, "split", 5, seed)
    x = _run(rule, problem)
    verdict = AxiomVerdict("nms", True)
    for spec in specs:
        split = split_problem(problem, spec)
        y = _run(_adapt(rule, spec), split)
        verdict.checked += 1
        got = sum((y[p] for p, _ in spec.parts), ZERO)
        if got != x[spec.target]:
            verdict.holds = False
            verdict.witness = Witness(
                "nms", _describe(rule), problem, (spec.target,), expected=x[spec.target], actual=got,
                allocation=x, transformation=spec, transformed_problem=split, transformed_allocation=y,
            )
            break
    return verdict


def check_nmrm(rule, problem: Problem, specs: Sequence[MergeSpec] | None = None, seed: int = 0) -> AxiomVerdict:
    if specs is None:
        from .gen import gen_specs

        specs = gen_specs(problem, "merge", 5, seed)
    x = _run(rule, problem)
    verdict = AxiomVerdict("nmrm", True)
    for spec in specs:
        merged = merge_problem(problem, spec)
        y = _run(_adapt(rule, spec), merged)
        verdict.checked += 1
        before = sum((x[j] for j in spec.sources), ZERO)
        if y[spec.merged_id] != before:
            verdict.holds = False
            verdict.witness = Witness(
                "nmrm", _describe(rule), problem, tuple(spec.sources), expected=before, actual=y[spec.merged_id],
                allocation=x, transformation=spec, transformed_problem=merged, transformed_allocation=y,
            )
            break
    if not specs:
        verdict.notes.append("no homologous claimants to merge")
    return verdict


CHECKERS: dict[str, Callable[..., AxiomVerdict]] = {
    "peff": check_peff,
    "ete": check_ete,
    "gma": check_gma,
    "cons": check_cons,
    "nms": check_nms,
    "nmrm": check_nmrm,
}
SPEC_KIND = {"cons": "subset", "nms": "split", "nmrm": "merge"}
CHARACTERIZING = ("peff", "ete", "gma", "cons", "nms")


def check(rule, axiom: str, problem: Problem, specs: Sequence | None = None, seed: int = 0) -> AxiomVerdict:
    axiom = axiom.lower()
    if axiom not in CHECKERS:
        raise KeyError(f"unknown axiom {axiom!r}; choose from {sorted(CHECKERS)}")
    if axiom in SPEC_KIND:
        return CHECKERS[axiom](rule, problem, specs, seed)
    return CHECKERS[axiom](rule, problem)


def verify_witness(rule, witness: Witness) -> bool:
    """Replay a witness from its problem and transformation only.

    Returns True when the violation reproduces exactly.  PEFF witnesses are
    confirmed by checking the recorded dominating allocation directly.
    """
    problem = witness.problem
    if witness.axiom == "peff":
        x = _run(rule, problem)
        better = witness.detail.get("dominating_allocation")
        if better is None:
            return bool(improvable_claimants(problem, x))
        return (
            is_feasible(problem, better)
            and all(better[j] >= x[j] for j in problem.claimant_ids)
            and any(better[j] > x[j] for j in problem.claimant_ids)
        )
    if witness.axiom == "ete":
        j, k = witness.claimants
        x = _run(rule, problem)
        return problem.alpha[j] == problem.alpha[k] and problem.claim[j] == problem.claim[k] and x[j] != x[k]
    if witness.axiom == "gma":
        return not check_gma(rule, problem).holds
    spec = witness.transformation
    if spec is None:
        return False
    return not check(rule, witness.axiom, problem, [spec]).holds


def fuzz_axiom(
    rule,
    axiom: str,
    params=None,
    budget: int = 1000,
    seed: int = 0,
    specs_per_trial: int = 5,
) -> Witness | None:
    """Search seeded random problems for a violation of ``axiom`` by ``rule``.

    Trial ``t`` draws its problem and specs from seeds derived from
    ``(seed, t)``, so the first witness found is the one with the smallest
    trial index.  A witness is returned only after :func:`verify_witness`
    has replayed it.
    """
    from .gen import GenParams, gen_problem, gen_specs, subseed

    if budget < 1:
        raise ValueError("budget must be at least 1")
    params = params or GenParams()
    for t in range(budget):
        problem = gen_problem(params, seed=subseed(seed, t, "problem"))
        specs = None
        if axiom in SPEC_KIND:
            kind = SPEC_KIND[axiom]
            count = len(problem.claimants) + specs_per_trial if kind == "subset" else specs_per_trial
            specs = gen_specs(problem, kind, count, subseed(seed, t, "specs"))
        verdict = check(rule, axiom, problem, specs)
        if not verdict.holds and verdict.witness is not None:
            if not verify_witness(rule, verdict.witness):
                raise AssertionError(f"witness for {axiom} failed to replay (trial {t})")
            verdict.witness.trial = t
            return verdict.witness
    return None


def axiom_profile(
    rule, problems: Iterable[Problem], axioms: Sequence[str] = CHARACTERIZING, seed: int = 0
) -> dict[str, list[Witness]]:
    """Run several checks over many problems and collect every violation found."""
    from .gen import subseed

    found: dict[str, list[Witness]] = {a: [] for a in axioms}
    for t, problem in enumerate(problems):
        for axiom in axioms:
            verdict = check(rule, axiom, problem, seed=subseed(seed, t, axiom))
            if not verdict.holds and verdict.witness is not None:
                verdict.witness.trial = t
                found[axiom].append(verdict.witness)
    return found
