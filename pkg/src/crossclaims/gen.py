"""Seeded random problems and transformation specs for fuzzing."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .axioms import MergeSpec, SplitSpec, SubsetSpec
from .core import Claimant, Issue, Problem


@dataclass(frozen=True)
class GenParams:
    """Shape of the random problems.

    ``duplicate_rate`` is the chance that a new claimant copies the issue set
    of an earlier one (half of those also copy its claim), so homologous and
    equal claimants show up often enough to exercise ETE and merging.
    """

    claimants: tuple[int, int] = (2, 8)
    issues: tuple[int, int] = (1, 5)
    density: float = 0.5
    max_claim: int = 20
    max_denominator: int = 64
    duplicate_rate: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("claimants", "issues"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ValueError(f"{name} range must satisfy 1 <= lo <= hi, got {(lo, hi)}")
        if not 0 < self.density <= 1:
            raise ValueError("density must be in (0, 1]")
        if self.max_claim < 1 or self.max_denominator < 1:
            raise ValueError("max_claim and max_denominator must be positive")
        if not 0 <= self.duplicate_rate <= 1:
            raise ValueError("duplicate_rate must be in [0, 1]")


def subseed(seed: int, *labels: object) -> int:
    """Deterministic 64-bit seed derived from ``seed`` and a path of labels."""
    return random.Random("/".join(map(str, (seed, *labels)))).getrandbits(64)


def _rational(rng: random.Random, upper: int, max_den: int) -> Fraction:
    """Uniform-ish rational in (0, upper] with denominator at most ``max_den``."""
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(1, upper * den), den)


def gen_problem(params: GenParams, seed: int | None = None) -> Problem:
    """Draw a problem whose every issue is strictly over-claimed.

    Capacities are a random fraction in (0, 1) of each issue's total claim,
    rounded down to a denominator of at most ``max_denominator``.
    """
    rng = random.Random(params.seed if seed is None else seed)
    n = rng.randint(*params.claimants)
    m = rng.randint(*params.issues)
    issue_ids = [f"E{k + 1}" for k in range(m)]

    rows: list[tuple[Fraction, frozenset[str]]] = []
    for _ in range(n):
        if rows and rng.random() < params.duplicate_rate:
            claim, issues = rng.choice(rows)
            if rng.random() < 0.5:
                claim = _rational(rng, params.max_claim, params.max_denominator)
        else:
            issues = frozenset(i for i in issue_ids if rng.random() < params.density)
            if not issues:
                issues = frozenset({rng.choice(issue_ids)})
            claim = _rational(rng, params.max_claim, params.max_denominator)
        rows.append((claim, issues))

    # Every issue needs a claimant, or it could never be over-claimed.
    claimed = set().union(*(s for _, s in rows))
    for i in issue_ids:
        if i not in claimed:
            k = rng.randrange(n)
            rows[k] = (rows[k][0], rows[k][1] | {i})

    claimants = tuple(Claimant(f"C{k + 1}", c, s) for k, (c, s) in enumerate(rows))
    totals = {i: sum((c for c, s in rows if i in s), Fraction(0)) for i in issue_ids}
    issues = []
    for i in issue_ids:
        share = Fraction(rng.randint(1, params.max_denominator - 1 or 1), params.max_denominator)
        den = rng.randint(1, params.max_denominator)
        amount = Fraction(math.floor(share * totals[i] * den), den)
        if amount <= 0 or amount >= totals[i]:
            amount = totals[i] / 2
        issues.append(Issue(i, amount))
    return Problem(tuple(issues), claimants)


def _fresh_ids(problem: Problem, stem: str, k: int) -> list[str]:
    taken = set(problem.claimant_ids)
    out = []
    n = 1
    while len(out) < k:
        candidate = f"{stem}.{n}"
        if candidate not in taken:
            out.append(candidate)
        n += 1
    return out


def gen_specs(problem: Problem, kind: str, count: int, seed: int = 0) -> list:
    """Transformation specs for the CONS (``subset``), NMS (``split``) and NMRM (``merge``) checks.

    Subsets enumerate every set of size |N|-1 first (dropping claimants in
    declaration order), then add random smaller ones.  Splits cut one
    claimant with a positive claim into 2-4 positive parts.  Merges pick
    two or more homologous claimants; if there are none the list is empty.
    """
    rng = random.Random(seed)
    ids = problem.claimant_ids
    if kind == "subset":
        out = [SubsetSpec(tuple(j for j in ids if j != drop)) for drop in ids] if len(ids) > 1 else []
        out = out[:count]
        seen = {s.keep for s in out}
        smaller = 2 ** len(ids) - 2 - len(ids)
        budget = 20 * count
        while len(out) < count and len(seen) - len(ids) < smaller and budget:
            budget -= 1
            size = rng.randint(1, len(ids) - 2)
            chosen = set(rng.sample(ids, size))
            keep = tuple(j for j in ids if j in chosen)
            if keep not in seen:
                seen.add(keep)
                out.append(SubsetSpec(keep))
        return out
    if kind == "split":
        targets = [c for c in problem.claimants if c.claim > 0]
        out = []
        for _ in range(count if targets else 0):
            target = rng.choice(targets)
            k = rng.randint(2, 4)
            weights = [rng.randint(1, 9) for _ in range(k)]
            total = sum(weights)
            claims = [target.claim * w / total for w in weights]
            out.append(SplitSpec(target.id, tuple(zip(_fresh_ids(problem, target.id, k), claims))))
        return out
    if kind == "merge":
        classes: dict[frozenset[str], list[str]] = {}
        for c in problem.claimants:
            classes.setdefault(c.issues, []).append(c.id)
        groups = [g for g in classes.values() if len(g) >= 2]
        if not groups:
            return []
        candidates = [
            combo for g in groups for size in range(2, len(g) + 1) for combo in itertools.combinations(g, size)
        ]
        if len(candidates) <= count:
            picked = candidates
        else:
            picked = [candidates[k] for k in sorted(rng.sample(range(len(candidates)), count))]
        return [MergeSpec(tuple(sources), sources[0]) for sources in picked]
    raise ValueError(f"unknown spec kind {kind!r}")
