from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossclaims.core import Claimant, Issue, Problem, is_feasible, is_pareto_efficient
from crossclaims.cpa import (
    CLAIM_EXHAUSTED,
    ISSUE_EXHAUSTED,
    cpa,
    decompose,
    max_uniform_factor,
    precedence_order,
    rho_sequence,
    solve_cpa,
)
from crossclaims.gen import GenParams, gen_problem

from .helpers import alloc, single_issue
from .oracles import leximin_ratios, prop_closed_form

SMALL = GenParams(claimants=(1, 6), issues=(1, 4))


def disjoint_union(a: Problem, b: Problem) -> Problem:
    """Rename b's ids so the two problems share nothing, then concatenate."""
    issues = a.issues + tuple(Issue("b" + i.id, i.amount) for i in b.issues)
    claimants = a.claimants + tuple(
        Claimant("b" + c.id, c.claim, frozenset("b" + i for i in c.issues)) for c in b.claimants
    )
    return Problem(issues, claimants)


class TestFixtures:
    def test_pb_trace(self, pb):
        x, trace = solve_cpa(pb)
        assert x == alloc(C1=6, C2=4)
        assert trace.lambdas == [F(2, 3), F(1, 4)]
        first, second = trace.steps
        assert first.per_issue_lambda == {"E1": F(10, 14), "E2": F(4, 6)}
        assert first.increments == {"C1": F(16, 3), "C2": F(4)}
        assert first.deactivated_issues == ("E2",)
        assert first.deactivated_claimants == {"C2": ISSUE_EXHAUSTED}
        assert second.active_claimants == ("C1",)
        assert second.increments == {"C1": F(2, 3)}
        assert trace.leftover == {"E1": 0, "E2": 0}

    def test_pa_trace(self, pa):
        x, trace = solve_cpa(pa)
        assert x == alloc(C1=3, C2=4)
        assert trace.lambdas == [F(3, 5), F(1, 6)]
        assert trace.steps[0].increments == {"C1": F(3), "C2": F(18, 5)}
        assert trace.steps[1].per_issue_lambda == {"E2": F(17, 12), "E3": F(1, 6)}
        assert trace.leftover == {"E1": 0, "E2": 3, "E3": 0}
        assert is_pareto_efficient(pa, x)

    def test_single_issue_is_prop(self):
        assert cpa(single_issue(10, 8, 6)) == alloc(C1=F(40, 7), C2=F(30, 7))
        assert cpa(single_issue(10, 7, 7)) == alloc(C1=5, C2=5)

    def test_full_reimbursement_when_nothing_binds(self):
        p = Problem.build({"E1": 10, "E2": 10}, [("C1", 3, ["E1"]), ("C2", 4, ["E1", "E2"])])
        x, trace = solve_cpa(p)
        assert x == alloc(C1=3, C2=4)
        assert trace.lambdas == [1]
        assert trace.steps[0].deactivated_claimants == {"C1": CLAIM_EXHAUSTED, "C2": CLAIM_EXHAUSTED}

    def test_zero_claims_and_dry_issues_are_inactive(self):
        p = Problem.build(
            {"E1": 0, "E2": 5},
            [("C1", 4, ["E1", "E2"]), ("C2", 0, ["E2"]), ("C3", 10, ["E2"])],
        )
        x, trace = solve_cpa(p)
        assert x == alloc(C1=0, C2=0, C3=5)
        assert trace.steps[0].active_claimants == ("C3",)
        order = precedence_order(trace)
        assert order.issue_step["E1"] == 0 and order.claimant_step["C1"] == 0


class TestPrecedenceAndRho:
    def test_pb(self, pb):
        trace = solve_cpa(pb)[1]
        order = precedence_order(trace)
        assert order.issue_step == {"E1": 2, "E2": 1}
        assert order.precedes("E2", "E1") and not order.precedes("E1", "E2")
        assert rho_sequence(trace) == [F(2, 3), F(3, 4)]

    def test_pa(self, pa):
        trace = solve_cpa(pa)[1]
        order = precedence_order(trace)
        assert order.issue_step == {"E1": 1, "E2": None, "E3": 2}
        assert order.issue_ranking() == [["E1"], ["E3"], ["E2"]]
        assert order.precedes("E1", "E3") and order.precedes("E3", "E2")
        assert rho_sequence(trace) == [F(3, 5), F(2, 3)]

    def test_single_full_step(self):
        p = Problem.build({"E1": 10, "E2": 10}, [("C1", 3, ["E1"]), ("C2", 4, ["E2"]), ("C3", 1, ["E1", "E2"])])
        # not over-claimed, but the procedure still runs
        trace = solve_cpa(p)[1]
        assert rho_sequence(trace) == [1]
        order = precedence_order(trace)
        assert order.issue_step == {"E1": None, "E2": None}
        assert order.simultaneous("E1", "E2")

    def test_max_uniform_factor(self):
        assert max_uniform_factor({"a": F(3), "b": F(1)}, {"a": F(6), "b": F(0)}) == F(1, 2)
        assert max_uniform_factor({"a": F(3)}, {"a": F(1)}) == 1


class TestAgainstLeximinOracle:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_matches_lp_leximin(self, seed):
        p = gen_problem(SMALL, seed=seed)
        x = cpa(p)
        ref = leximin_ratios(p.capacity, p.claim, p.alpha)
        for j in p.claimant_ids:
            assert float(x[j]) == pytest.approx(ref[j], rel=1e-6, abs=1e-6)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_structural_properties(seed):
    p = gen_problem(GenParams(claimants=(1, 10), issues=(1, 6)), seed=seed)
    x, trace = solve_cpa(p)
    assert is_feasible(p, x)
    assert is_pareto_efficient(p, x)
    assert 1 <= len(trace.steps) <= len(p.issues)
    for k, step in enumerate(trace.steps):
        assert 0 < step.lam <= 1
        for j in step.active_claimants:
            assert step.increments[j] > 0
        if step.lam < 1:
            assert step.deactivated_issues
            argmin = [i for i, v in step.per_issue_lambda.items() if v == step.lam]
            assert set(argmin) <= set(step.deactivated_issues)
        else:
            assert k == len(trace.steps) - 1
    rho = rho_sequence(trace)
    assert all(a < b for a, b in zip(rho, rho[1:]))
    assert [s.rho_after for s in trace.steps] == rho
    assert rho[-1] <= 1
    order = precedence_order(trace)
    for j, step in order.claimant_step.items():
        if step and p.claim[j] > 0:
            assert x[j] == rho[step - 1] * p.claim[j]


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**6), st.lists(st.integers(1, 10**4), min_size=1, max_size=12))
def test_single_issue_equals_prop(amount, claims):
    amount = F(amount, 7)
    if amount >= sum(claims):
        amount = F(sum(claims), 3)
    x = cpa(single_issue(amount, *claims))
    assert list(x.values()) == prop_closed_form(amount, [F(c) for c in claims])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_decomposition_identity(s1, s2):
    a, b = gen_problem(SMALL, seed=s1), gen_problem(SMALL, seed=s2)
    whole = disjoint_union(a, b)
    expected = {**cpa(a), **{"b" + j: v for j, v in cpa(b).items()}}
    assert cpa(whole) == expected
    parts = decompose(whole)
    assert len(parts) >= 2
    merged = {}
    for part in parts:
        merged.update(cpa(part))
    assert merged == cpa(whole)


def test_decompose_shapes(pb):
    assert decompose(pb) == [pb]
    pairs = Problem.build({f"E{k}": k for k in range(1, 5)}, [(f"C{k}", 2 * k, [f"E{k}"]) for k in range(1, 5)])
    parts = decompose(pairs)
    assert len(parts) == 4
    for k, part in enumerate(parts, start=1):
        assert cpa(part) == {f"C{k}": min(F(2 * k), F(k))}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.fractions(min_value=F(1, 50), max_value=50, max_denominator=50))
def test_scale_covariance(seed, factor):
    p = gen_problem(SMALL, seed=seed)
    scaled = Problem(
        tuple(Issue(i.id, i.amount * factor) for i in p.issues),
        tuple(Claimant(c.id, c.claim * factor, c.issues) for c in p.claimants),
    )
    x = cpa(p)
    assert cpa(scaled) == {j: v * factor for j, v in x.items()}
