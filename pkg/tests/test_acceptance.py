"""Acceptance criteria, one test each, at the stated sizes and tolerances.

Every test records a PASS/FAIL line; the lines are printed in the terminal
summary (see ``conftest.pytest_terminal_summary``).
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from fractions import Fraction as F

import pytest

from crossclaims.axioms import CHARACTERIZING, check, fuzz_axiom, verify_witness
from crossclaims.cli import main
from crossclaims.core import Claimant, Issue, Problem, is_feasible, is_pareto_efficient
from crossclaims.cpa import cpa, precedence_order, rho_sequence, solve_cpa
from crossclaims.documents import dumps, problem_to_doc, verdict_to_doc, witness_to_doc
from crossclaims.gen import GenParams, gen_problem, gen_specs, subseed
from crossclaims.rules import CEA_MAC, CPA, NULL, PRIORITY, TWO_PHASE, TWO_STEP

RESULTS: list[str] = []

THEOREM_PARAMS = GenParams(claimants=(1, 12), issues=(1, 8))
FUZZ_PARAMS = GenParams()
FUZZ_BUDGET = 10_000
PROFILE_INSTANCES = 1_000
PROFILE = [
    (NULL, "peff"),
    (PRIORITY, "ete"),
    (TWO_PHASE, "gma"),
    (TWO_STEP, "cons"),
    (CEA_MAC, "nms"),
]


@contextmanager
def criterion(label: str):
    try:
        yield
    except BaseException:
        RESULTS.append(f"FAIL  {label}")
        raise
    RESULTS.append(f"PASS  {label}")


def _pb() -> Problem:
    return Problem.build({"E1": 10, "E2": 4}, [("C1", 8, ["E1"]), ("C2", 6, ["E1", "E2"])])


def _pa() -> Problem:
    return Problem.build({"E1": 3, "E2": 10, "E3": 4}, [("C1", 5, ["E1", "E2"]), ("C2", 6, ["E2", "E3"])])


def test_criterion_1_fixture_pb():
    with criterion("1 fixture PB: CPA=(6,4), lambda=(2/3,1/4), rho=(2/3,3/4), E2 < E1"):
        x, trace = solve_cpa(_pb())
        assert x == {"C1": F(6), "C2": F(4)}
        assert trace.lambdas == [F(2, 3), F(1, 4)]
        assert rho_sequence(trace) == [F(2, 3), F(3, 4)]
        order = precedence_order(trace)
        assert order.precedes("E2", "E1") and not order.precedes("E1", "E2")


def test_criterion_2_fixture_pa():
    with criterion("2 fixture PA: CPA=(3,4), leftover E2=3, Pareto efficient"):
        p = _pa()
        x, trace = solve_cpa(p)
        assert x == {"C1": F(3), "C2": F(4)}
        assert trace.leftover == {"E1": 0, "E2": 3, "E3": 0}
        assert is_pareto_efficient(p, x)


def test_criterion_3_single_issue_is_prop():
    with criterion("3 single-issue CPA == PROP closed form on 1000 instances, < 5 s"):
        params = GenParams(claimants=(1, 12), issues=(1, 1))
        start = time.perf_counter()
        for t in range(1000):
            p = gen_problem(params, seed=subseed(3, t))
            e = p.issues[0].amount
            total = sum(p.claim.values())
            assert cpa(p) == {j: c / total * e for j, c in p.claim.items()}
        elapsed = time.perf_counter() - start
        assert elapsed < 5, f"{elapsed:.2f} s"


def _theorem_suite(instances: int) -> list[dict]:
    docs = []
    for t in range(instances):
        p = gen_problem(THEOREM_PARAMS, seed=subseed(4, t))
        verdicts = [
            check(CPA, "peff", p),
            check(CPA, "ete", p),
            check(CPA, "gma", p),
            check(CPA, "cons", p, gen_specs(p, "subset", len(p.claimants), subseed(4, t, "subset"))),
            check(CPA, "nms", p, gen_specs(p, "split", 5, subseed(4, t, "split"))),
            check(CPA, "nmrm", p, gen_specs(p, "merge", 20, subseed(4, t, "merge"))),
        ]
        docs.append({"trial": t, "verdicts": [verdict_to_doc(v) for v in verdicts]})
    return docs


def test_criterion_4_theorem_suite():
    with criterion("4 CPA passes PEFF/ETE/GMA/CONS/NMS/NMRM on 1000 instances, < 60 s"):
        start = time.perf_counter()
        docs = _theorem_suite(1000)
        elapsed = time.perf_counter() - start
        failures = [(d["trial"], v["axiom"]) for d in docs for v in d["verdicts"] if not v["holds"]]
        assert failures == []
        assert elapsed < 60, f"{elapsed:.2f} s"


def _rename(problem: Problem, prefix: str) -> Problem:
    return Problem(
        tuple(Issue(prefix + i.id, i.amount) for i in problem.issues),
        tuple(Claimant(prefix + c.id, c.claim, frozenset(prefix + i for i in c.issues)) for c in problem.claimants),
    )


def test_criterion_5_proposition_1():
    with criterion("5 decomposition identity on 200 disjoint unions; step bound; deactivation; rho increasing"):
        params = GenParams(claimants=(1, 8), issues=(1, 5))
        for t in range(200):
            a = _rename(gen_problem(params, seed=subseed(5, t, "a")), "a")
            b = _rename(gen_problem(params, seed=subseed(5, t, "b")), "b")
            whole = Problem(a.issues + b.issues, a.claimants + b.claimants)
            x, trace = solve_cpa(whole)
            assert x == {**cpa(a), **cpa(b)}
            assert len(trace.steps) <= len(whole.issues)
            for k, step in enumerate(trace.steps):
                if step.lam < 1:
                    assert step.deactivated_issues
                else:
                    assert k == len(trace.steps) - 1
            rho = rho_sequence(trace)
            assert all(r < s for r, s in zip(rho, rho[1:]))


@pytest.fixture(scope="module")
def independence():
    """Fuzz each counterexample rule for its broken axiom, then sample the other four."""
    start = time.perf_counter()
    witnesses = {}
    for rule, axiom in PROFILE:
        witnesses[rule.name] = fuzz_axiom(rule, axiom, FUZZ_PARAMS, budget=FUZZ_BUDGET, seed=6)
    problems = [gen_problem(THEOREM_PARAMS, seed=subseed(6, t, "profile")) for t in range(PROFILE_INSTANCES)]
    held: dict[str, dict[str, int]] = {}
    for rule, broken in PROFILE:
        counts = {}
        for axiom in CHARACTERIZING:
            if axiom == broken:
                continue
            counts[axiom] = sum(
                not check(rule, axiom, p, seed=subseed(6, t, axiom)).holds for t, p in enumerate(problems)
            )
        held[rule.name] = counts
    return {"witnesses": witnesses, "held": held, "elapsed": time.perf_counter() - start}


def test_criterion_6_independence(independence):
    with criterion("6 independence: NULL!PEFF, PRIORITY!ETE, TWO_PHASE!GMA, TWO_STEP!CONS, CEA_MAC!NMS"):
        for rule, axiom in PROFILE:
            w = independence["witnesses"][rule.name]
            assert w is not None, f"no {axiom} witness for {rule.name} in {FUZZ_BUDGET} trials"
            assert verify_witness(rule, w)
        for rule, _ in PROFILE:
            counts = independence["held"][rule.name]
            if rule.reconstructed:
                if any(counts.values()):
                    RESULTS.append(f"NOTE  6 {rule.name} (reconstructed) deviations: {counts}")
                continue
            assert not any(counts.values()), f"{rule.name}: {counts}"


def test_criterion_7_performance(independence, tmp_path, capsys):
    with criterion("7 solve 50 claimants x 20 issues < 1 s; criterion-6 fuzz budget < 10 min"):
        path = tmp_path / "big.json"
        p = gen_problem(GenParams(claimants=(50, 50), issues=(20, 20), density=0.4), seed=7)
        path.write_text(json.dumps(problem_to_doc(p)))
        start = time.perf_counter()
        assert main(["solve", "--rule", "cpa", "-i", str(path), "--trace"]) == 0
        elapsed = time.perf_counter() - start
        capsys.readouterr()
        assert elapsed < 1, f"solve took {elapsed:.3f} s"
        assert independence["elapsed"] < 600, f"fuzz took {independence['elapsed']:.1f} s"


def test_criterion_8_determinism(independence, tmp_path):
    with criterion("8 determinism: repeated runs give bit-identical documents"):
        for rule, axiom in PROFILE:
            again = fuzz_axiom(rule, axiom, FUZZ_PARAMS, budget=FUZZ_BUDGET, seed=6)
            assert dumps(witness_to_doc(again)) == dumps(witness_to_doc(independence["witnesses"][rule.name]))
        assert dumps(_theorem_suite(50)) == dumps(_theorem_suite(50))
        outputs = []
        for _ in range(2):
            out = tmp_path / "gen.json"
            main(["gen", "--claimants", "3..50", "--issues", "1..20", "--seed", "8", "-o", str(out)])
            solved = tmp_path / "solved.json"
            main(["solve", "-i", str(out), "--trace", "-o", str(solved)])
            outputs.append(out.read_bytes() + solved.read_bytes())
        assert outputs[0] == outputs[1]
