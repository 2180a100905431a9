from fractions import Fraction as F

from crossclaims.core import Problem


def single_issue(amount, *claims) -> Problem:
    return Problem.build({"E1": amount}, [(f"C{k + 1}", c, ["E1"]) for k, c in enumerate(claims)])


def alloc(**awards) -> dict:
    return {j: F(a) for j, a in awards.items()}
