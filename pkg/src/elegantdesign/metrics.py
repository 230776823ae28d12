"""Coupling and the four elegance measures. All five are minimised.

Standard deviations are population standard deviations over the k classes.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

from .genome import DesignSolution
from .problem import DesignProblem

ELEGANCE_MEASURES = ("nac", "ec", "iu", "atmr")
OBJECTIVES = ("coupling",) + ELEGANCE_MEASURES


class MetricVector(NamedTuple):
    coupling: float
    nac: float
    ec: float
    iu: float
    atmr: float

    def to_dict(self) -> dict[str, float]:
        return dict(self._asdict())

    @classmethod
    def from_dict(cls, obj: dict) -> "MetricVector":
        return cls(*(float(obj[name]) for name in OBJECTIVES))


class ClassProfile(NamedTuple):
    """Per-class counts every metric is derived from."""

    attributes: list[int]
    methods: list[int]
    internal_uses: list[int]
    external_couples: list[int]
    n_external: int
    n_uses: int


def pstdev(values: Sequence[float]) -> float:
    n = len(values)
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / n)


def profile(problem: DesignProblem, solution: DesignSolution) -> ClassProfile:
    k = solution.k
    assignment = solution.assignment
    n_attr = problem.n_attributes
    attrs = [0] * k
    meths = [0] * k
    for c in assignment[:n_attr]:
        attrs[c] += 1
    for c in assignment[n_attr:]:
        meths[c] += 1
    internal = [0] * k
    external = [0] * k
    n_ext = 0
    for m, a in problem.use_index:
        cm, ca = assignment[m], assignment[a]
        if cm == ca:
            internal[cm] += 1
        else:
            external[cm] += 1
            external[ca] += 1
            n_ext += 1
    return ClassProfile(attrs, meths, internal, external, n_ext, len(problem.use_index))


def external_couples(problem: DesignProblem, solution: DesignSolution) -> int:
    """Number of uses whose method and attribute sit in different classes."""
    return profile(problem, solution).n_external


def coupling(problem: DesignProblem, solution: DesignSolution) -> float:
    p = profile(problem, solution)
    return p.n_external / p.n_uses


def nac_elegance(problem: DesignProblem, solution: DesignSolution) -> float:
    p = profile(problem, solution)
    return (pstdev(p.attributes) + pstdev(p.methods)) / 2


def ec_elegance(problem: DesignProblem, solution: DesignSolution) -> float:
    # an external use counts once for each of its two endpoint classes
    return pstdev(profile(problem, solution).external_couples)


def iu_elegance(problem: DesignProblem, solution: DesignSolution) -> float:
    return pstdev(profile(problem, solution).internal_uses)


def _ratios(p: ClassProfile) -> list[float]:
    # classes without methods use a denominator of 1
    return [a / max(m, 1) for a, m in zip(p.attributes, p.methods)]


def atmr_elegance(problem: DesignProblem, solution: DesignSolution) -> float:
    return pstdev(_ratios(profile(problem, solution)))


def evaluate(problem: DesignProblem, solution: DesignSolution) -> MetricVector:
    p = profile(problem, solution)
    return MetricVector(
        coupling=p.n_external / p.n_uses,
        nac=(pstdev(p.attributes) + pstdev(p.methods)) / 2,
        ec=pstdev(p.external_couples),
        iu=pstdev(p.internal_uses),
        atmr=pstdev(_ratios(p)),
    )
