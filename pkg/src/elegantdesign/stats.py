"""Rank-based tests: tie-averaged ranks, Spearman, Friedman, Wilcoxon signed-rank,
and the elegance-vs-reward correlation matrix built from episode logs."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Literal, NamedTuple, Optional, Sequence

from scipy import stats as _dist

from .metrics import ELEGANCE_MEASURES

# exact signed-rank null distribution up to this many non-zero differences
WILCOXON_EXACT_MAX_N = 50

Alternative = Literal["two-sided", "less", "greater"]


class UndefinedCorrelation(ValueError):
    pass


class NoEffect(ValueError):
    """Every paired difference is zero, so the signed-rank test is undefined."""


@dataclass(frozen=True)
class PairedSample:
    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValueError(f"unequal lengths {len(self.x)} and {len(self.y)}")
        if len(self.x) < 2:
            raise ValueError("need at least 2 pairs")
        if not all(math.isfinite(v) for v in self.x + self.y):
            raise ValueError("values must be finite")

    @property
    def n(self) -> int:
        return len(self.x)


def ranks(values: Sequence[float]) -> list[float]:
    """Ascending ranks from 1; tied values share the mean of their rank span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    out = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2 + 1
        for t in range(i, j + 1):
            out[order[t]] = mean_rank
        i = j + 1
    return out


def _tie_term(values: Iterable[float]) -> int:
    return sum(t**3 - t for t in Counter(values).values())


class SpearmanResult(NamedTuple):
    rho: float
    p: float


def spearman(sample: PairedSample) -> SpearmanResult:
    """Pearson correlation of tie-averaged ranks; two-tailed p from t with n-2 df."""
    rx, ry = ranks(sample.x), ranks(sample.y)
    n = sample.n
    mx, my = sum(rx) / n, sum(ry) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    sxx = sum((a - mx) ** 2 for a in rx)
    syy = sum((b - my) ** 2 for b in ry)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelation("a variable has zero rank variance")
    rho = max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))
    if n < 3:
        return SpearmanResult(rho, math.nan)
    if abs(rho) == 1.0:
        return SpearmanResult(rho, 0.0)
    t = rho * math.sqrt((n - 2) / (1 - rho * rho))
    return SpearmanResult(rho, float(2 * _dist.t.sf(abs(t), n - 2)))


class FriedmanResult(NamedTuple):
    chi2: float
    df: int
    p: float


def friedman(blocks: Sequence[Sequence[float]]) -> FriedmanResult:
    """Friedman test with tie correction; rows are blocks, columns treatments."""
    n = len(blocks)
    if n < 2:
        raise ValueError("need at least 2 blocks")
    k = len(blocks[0])
    if k < 2:
        raise ValueError("need at least 2 treatments")
    if any(len(row) != k for row in blocks):
        raise ValueError("ragged table")
    rank_sums = [0.0] * k
    ties = 0
    for row in blocks:
        for j, r in enumerate(ranks(row)):
            rank_sums[j] += r
        ties += _tie_term(row)
    denom = 1 - ties / (n * (k**3 - k))
    if denom <= 0:
        return FriedmanResult(0.0, k - 1, 1.0)
    chi2 = (12 / (n * k * (k + 1)) * sum(r * r for r in rank_sums) - 3 * n * (k + 1)) / denom
    chi2 = max(chi2, 0.0)
    return FriedmanResult(chi2, k - 1, float(_dist.chi2.sf(chi2, k - 1)))


class WilcoxonResult(NamedTuple):
    w: float
    p: float
    n_effective: int
    t_plus: float
    t_minus: float


def _signed_rank_cdf(doubled_ranks: Sequence[int], t_plus_doubled: int) -> float:
    """P(T+ <= t) under the null, by counting all 2^n sign assignments via DP."""
    total = sum(doubled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    reach = 0
    for r in doubled_ranks:
        reach += r
        for s in range(reach, r - 1, -1):
            counts[s] += counts[s - r]
    return sum(counts[: t_plus_doubled + 1]) / 2 ** len(doubled_ranks)


def wilcoxon_signed_rank(sample: PairedSample, alternative: Alternative = "two-sided") -> WilcoxonResult:
    """Matched-pairs signed-rank test on d = x - y.

    Zero differences are dropped. ``w`` is min(T+, T-). Small samples use the
    exact null distribution of the observed ranks; larger ones use the normal
    approximation with tie correction. ``"less"`` tests whether x tends to be
    smaller than y.
    """
    d = [a - b for a, b in zip(sample.x, sample.y) if a != b]
    n = len(d)
    if n == 0:
        raise NoEffect("all differences are zero")
    r = ranks([abs(v) for v in d])
    t_plus = sum(rk for rk, v in zip(r, d) if v > 0)
    t_minus = sum(rk for rk, v in zip(r, d) if v < 0)
    w = min(t_plus, t_minus)

    if n <= WILCOXON_EXACT_MAX_N:
        doubled = [int(round(2 * rk)) for rk in r]
        cdf = lambda t: _signed_rank_cdf(doubled, int(round(2 * t)))  # noqa: E731
        if alternative == "less":
            p = cdf(t_plus)
        elif alternative == "greater":
            # T- <= t_minus  <=>  T+ >= t_plus, and T- has the same null law
            p = cdf(t_minus)
        else:
            p = min(1.0, 2 * cdf(w))
    else:
        mean = n * (n + 1) / 4
        var = n * (n + 1) * (2 * n + 1) / 24 - _tie_term(r) / 48
        if var <= 0:
            p = 1.0
        else:
            sd = math.sqrt(var)
            if alternative == "less":
                p = float(_dist.norm.cdf((t_plus - mean) / sd))
            elif alternative == "greater":
                p = float(_dist.norm.sf((t_plus - mean) / sd))
            else:
                p = min(1.0, float(2 * _dist.norm.cdf((w - mean) / sd)))
    return WilcoxonResult(float(w), p, n, float(t_plus), float(t_minus))


# -- elegance vs reward over episode logs -------------------------------------


@dataclass
class CorrelationCell:
    reward: str
    elegance: str
    n: int
    rho: Optional[float] = None
    p: Optional[float] = None
    note: str = ""

    @property
    def computable(self) -> bool:
        return self.rho is not None

    def to_dict(self) -> dict:
        return {"n": self.n, "rho": self.rho, "p": self.p, "computable": self.computable, "note": self.note}


@dataclass
class CorrelationMatrix:
    """Rows: reward for the presented measure; columns: elegance values."""

    cells: dict[tuple[str, str], CorrelationCell]

    def cell(self, reward: str, elegance: str) -> CorrelationCell:
        return self.cells[(reward, elegance)]

    def to_dict(self) -> dict:
        return {
            "rows": [f"{m}_reward" for m in ELEGANCE_MEASURES],
            "columns": [f"{m}_elegance" for m in ELEGANCE_MEASURES],
            "cells": {
                f"{r}_reward": {f"{e}_elegance": self.cells[(r, e)].to_dict() for e in ELEGANCE_MEASURES}
                for r in ELEGANCE_MEASURES
            },
        }

    def to_tsv(self) -> str:
        def fmt(v: Optional[float]) -> str:
            return "NA" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.3f}"

        lines = ["\t".join(["reward", "statistic"] + [f"{m.upper()} elegance" for m in ELEGANCE_MEASURES])]
        for r in ELEGANCE_MEASURES:
            row = [self.cells[(r, e)] for e in ELEGANCE_MEASURES]
            lines.append("\t".join([f"{r.upper()} reward", "rho"] + [fmt(c.rho) for c in row]))
            lines.append("\t".join(["", "p (2-tailed)"] + [fmt(c.p) for c in row]))
            lines.append("\t".join(["", "N"] + [str(c.n) for c in row]))
        return "\n".join(lines) + "\n"


def correlate_logs(logs) -> CorrelationMatrix:
    """Spearman rho between stars and each elegance value, grouped by presented measure.

    Interactions are pooled across all logs.
    """
    interactions = [rec for log in logs for rec in log.interactions]
    if len(interactions) < 3:
        raise ValueError(f"need at least 3 interactions, got {len(interactions)}")
    cells = {}
    for r in ELEGANCE_MEASURES:
        group = [rec for rec in interactions if rec.chosen_measure == r]
        stars = [float(rec.stars) for rec in group]
        for e in ELEGANCE_MEASURES:
            values = [getattr(rec.candidate_metrics, e) for rec in group]
            cell = CorrelationCell(r, e, len(group))
            if len(group) < 3:
                cell.note = "fewer than 3 interactions"
            else:
                try:
                    rho, p = spearman(PairedSample(tuple(stars), tuple(values)))
                    cell.rho, cell.p = rho, p
                except UndefinedCorrelation:
                    cell.note = "zero rank variance"
            cells[(r, e)] = cell
    return CorrelationMatrix(cells)
