"""Candidate designs as fixed-k partitions of a problem's elements into classes."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .problem import DesignProblem


@dataclass(frozen=True)
class DesignSolution:
    """Class assignment for every element of ``problem``.

    ``assignment[i]`` is the class index of element ``i`` in canonical order
    (attributes first, then methods).
    """

    problem: DesignProblem = field(repr=False, compare=False)
    k: int
    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(self.assignment))
        self.check()

    def check(self) -> None:
        if self.k < 2:
            raise ValueError(f"class count must be >= 2, got {self.k}")
        if len(self.assignment) != self.problem.n_elements:
            raise ValueError(
                f"assignment covers {len(self.assignment)} elements, problem has {self.problem.n_elements}"
            )
        used = set(self.assignment)
        if not used <= set(range(self.k)):
            raise ValueError(f"class index out of range [0, {self.k})")
        if len(used) != self.k:
            empty = sorted(set(range(self.k)) - used)
            raise ValueError(f"empty class(es): {empty}")

    def members(self, index: int) -> list[int]:
        return [i for i, c in enumerate(self.assignment) if c == index]

    def relabel(self, mapping: Sequence[int]) -> "DesignSolution":
        """Same partition with class ``c`` renamed to ``mapping[c]``."""
        return DesignSolution(self.problem, self.k, tuple(mapping[c] for c in self.assignment))

    def to_dict(self) -> dict:
        n_attr = self.problem.n_attributes
        classes = [{"index": c, "attributes": [], "methods": []} for c in range(self.k)]
        for i, c in enumerate(self.assignment):
            if i < n_attr:
                classes[c]["attributes"].append(self.problem.attributes[i])
            else:
                classes[c]["methods"].append(self.problem.methods[i - n_attr])
        return {"classes": classes}

    @classmethod
    def from_dict(cls, problem: DesignProblem, obj: dict) -> "DesignSolution":
        position = {e: i for i, e in enumerate(problem.elements)}
        assignment: list[int | None] = [None] * problem.n_elements
        classes = obj["classes"]
        for entry in classes:
            for ident in list(entry["attributes"]) + list(entry["methods"]):
                if ident not in position:
                    raise ValueError(f"unknown element {ident!r}")
                if assignment[position[ident]] is not None:
                    raise ValueError(f"element {ident!r} assigned twice")
                assignment[position[ident]] = int(entry["index"])
        if any(c is None for c in assignment):
            missing = [problem.elements[i] for i, c in enumerate(assignment) if c is None]
            raise ValueError(f"unassigned element(s): {missing}")
        return cls(problem, len(classes), tuple(assignment))  # type: ignore[arg-type]


def repair(assignment: list[int], k: int) -> list[int]:
    """Fill empty classes in place, lowest empty index first.

    Each empty class receives the earliest element of a currently largest
    class (ties go to the lowest class index).
    """
    sizes = [0] * k
    for c in assignment:
        sizes[c] += 1
    for empty in range(k):
        if sizes[empty]:
            continue
        donor = max(range(k), key=lambda c: (sizes[c], -c))
        moved = assignment.index(donor)
        assignment[moved] = empty
        sizes[donor] -= 1
        sizes[empty] += 1
    return assignment


def random_solution(problem: DesignProblem, k: int, rng: random.Random) -> DesignSolution:
    n = problem.n_elements
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in [2, {n}], got {k}")
    assignment = [rng.randrange(k) for _ in range(n)]
    return DesignSolution(problem, k, tuple(repair(assignment, k)))


def mutate(solution: DesignSolution, rate: float, rng: random.Random) -> DesignSolution:
    """Move each element with probability ``rate`` to a uniformly chosen other class."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mutation rate must lie in [0, 1], got {rate}")
    k = solution.k
    assignment = list(solution.assignment)
    moved = False
    for i, c in enumerate(assignment):
        if rng.random() < rate:
            # uniform over the k-1 other classes
            new = rng.randrange(k - 1)
            assignment[i] = new + 1 if new >= c else new
            moved = True
    if not moved:
        return solution
    return DesignSolution(solution.problem, k, tuple(repair(assignment, k)))


def crossover(parent_a: DesignSolution, parent_b: DesignSolution, rng: random.Random) -> DesignSolution:
    """Uniform crossover: each element's class comes from either parent with p = 1/2."""
    if parent_a.problem is not parent_b.problem and parent_a.problem != parent_b.problem:
        raise ValueError("parents are bound to different problems")
    if parent_a.k != parent_b.k:
        raise ValueError(f"parents have different class counts ({parent_a.k} vs {parent_b.k})")
    child = [a if rng.random() < 0.5 else b for a, b in zip(parent_a.assignment, parent_b.assignment)]
    return DesignSolution(parent_a.problem, parent_a.k, tuple(repair(child, parent_a.k)))
