import math
import random

import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from elegantdesign.evolution import EpisodeLog, InteractionRecord
from elegantdesign.metrics import MetricVector
from elegantdesign.stats import (
    NoEffect,
    PairedSample,
    UndefinedCorrelation,
    correlate_logs,
    friedman,
    ranks,
    spearman,
    wilcoxon_signed_rank,
)

from oracles import exact_wilcoxon_less, exact_wilcoxon_two_sided, friedman_bruteforce, signed_rank_statistics


def paired(x, y):
    return PairedSample(tuple(x), tuple(y))


@pytest.mark.parametrize(
    "values, expected",
    [([10, 20, 30], [1, 2, 3]), ([5, 5], [1.5, 1.5]), ([3, 1, 3, 2], [3.5, 1, 3.5, 2]), ([7], [1])],
)
def test_ranks(values, expected):
    assert ranks(values) == expected


def test_spearman_extremes():
    assert spearman(paired([1, 2, 3, 4], [10, 20, 30, 40])).rho == 1.0
    assert spearman(paired([1, 2, 3, 4], [4, 3, 2, 1])).rho == -1.0


def test_spearman_point_eight():
    x, y = [1, 2, 3, 4, 5], [2, 1, 4, 3, 5]
    d2 = sum((a - b) ** 2 for a, b in zip(ranks(x), ranks(y)))
    assert d2 == 4
    assert 1 - 6 * d2 / (5 * (25 - 1)) == 0.8
    assert spearman(paired(x, y)).rho == 0.8


def test_spearman_matches_scipy_with_ties():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(3, 40)
        x = [rng.randint(1, 5) for _ in range(n)]
        y = [rng.random() for _ in range(n)]
        if len(set(x)) < 2:
            continue
        ours = spearman(paired(x, y))
        ref = scipy.stats.spearmanr(x, y)
        assert ours.rho == pytest.approx(ref.statistic, abs=1e-12)
        assert ours.p == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-15)


def test_spearman_zero_variance():
    with pytest.raises(UndefinedCorrelation):
        spearman(paired([3, 3, 3], [1, 2, 3]))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=3, max_size=25))
def test_spearman_symmetry_and_monotone_invariance(pairs):
    x = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    if len(set(x)) < 2 or len(set(y)) < 2:
        return
    r = spearman(paired(x, y)).rho
    assert spearman(paired(y, x)).rho == pytest.approx(r, abs=1e-12)
    assert spearman(paired([v**3 + 7 for v in x], [math.exp(v / 10) for v in y])).rho == pytest.approx(r, abs=1e-12)


def test_friedman_identical_rankings():
    table = [[1, 2, 3, 4]] * 10
    res = friedman(table)
    assert res.chi2 == pytest.approx(30.0, abs=1e-12)  # R_j = 10 j
    assert res.df == 3
    assert res.p < 0.01


def test_friedman_all_equal():
    assert friedman([[2, 2, 2], [5, 5, 5]]) == (0.0, 2, 1.0)


def test_friedman_two_treatments_bruteforce():
    table = [[1.0, 2.0], [3.0, 1.0], [0.5, 4.0]]
    assert friedman(table).chi2 == pytest.approx(friedman_bruteforce(table), abs=1e-12)


def test_friedman_matches_scipy():
    rng = random.Random(8)
    for _ in range(30):
        n, k = rng.randint(2, 12), rng.randint(3, 5)
        table = [[rng.randint(1, 4) for _ in range(k)] for _ in range(n)]
        if all(len(set(r)) == 1 for r in table):
            continue
        ours = friedman(table)
        ref = scipy.stats.friedmanchisquare(*zip(*table))
        assert ours.chi2 == pytest.approx(ref.statistic, rel=1e-10)
        assert ours.p == pytest.approx(ref.pvalue, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(0, 9), min_size=3, max_size=3), min_size=2, max_size=8))
def test_friedman_within_block_transform(table):
    transformed = [[2 * v**3 + 1 for v in row] for row in table]
    assert friedman(transformed).chi2 == pytest.approx(friedman(table).chi2, abs=1e-9)


def test_wilcoxon_no_effect():
    with pytest.raises(NoEffect):
        wilcoxon_signed_rank(paired([1, 2, 3], [1, 2, 3]))


def test_wilcoxon_all_positive():
    res = wilcoxon_signed_rank(paired([1, 2, 3], [0, 0, 0]))
    assert res.w == 0 and res.t_minus == 0 and res.t_plus == 6
    assert res.p == pytest.approx(exact_wilcoxon_two_sided([1, 2, 3]), abs=1e-12)
    assert wilcoxon_signed_rank(paired([1, 2, 3], [0, 0, 0]), "greater").p == pytest.approx(1 / 8)


def test_wilcoxon_mixed_signs():
    d = [1, -2, 3, -4, 5]
    res = wilcoxon_signed_rank(paired(d, [0] * 5))
    assert (res.t_plus, res.t_minus, res.w) == (9, 6, 6)
    assert signed_rank_statistics(d) == (9, 6)


def test_wilcoxon_drops_zero_differences():
    res = wilcoxon_signed_rank(paired([1, 2, 3, 4], [1, 0, 3, 1]))
    assert res.n_effective == 2


@pytest.mark.parametrize("n", range(2, 8))
def test_wilcoxon_exact_small_n(n):
    rng = random.Random(n)
    for _ in range(5):
        d = rng.sample(range(1, 40), n)
        d = [v * rng.choice((1, -1)) for v in d]
        ours = wilcoxon_signed_rank(paired(d, [0] * n))
        assert ours.p == pytest.approx(exact_wilcoxon_two_sided(d), abs=1e-9)
        less = wilcoxon_signed_rank(paired(d, [0] * n), "less")
        assert less.p == pytest.approx(exact_wilcoxon_less(d), abs=1e-9)


def test_wilcoxon_exact_with_ties():
    d = [1, 1, -2, 3, 3, -3, 4]
    assert wilcoxon_signed_rank(paired(d, [0] * 7)).p == pytest.approx(exact_wilcoxon_two_sided(d), abs=1e-9)


def test_wilcoxon_large_n_normal_approximation():
    rng = random.Random(4)
    x = [rng.gauss(0.3, 1) for _ in range(80)]
    y = [rng.gauss(0, 1) for _ in range(80)]
    ours = wilcoxon_signed_rank(paired(x, y))
    ref = scipy.stats.wilcoxon(x, y, method="approx", correction=False)
    assert ours.w == pytest.approx(ref.statistic)
    assert ours.p == pytest.approx(ref.pvalue, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=2, max_size=20),
    st.integers(-1000, 1000),
)
def test_wilcoxon_shift_invariance(pairs, c):
    x = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    if x == y:
        return
    assert wilcoxon_signed_rank(paired(x, y)).w == wilcoxon_signed_rank(paired([v + c for v in x], [v + c for v in y])).w


def test_paired_sample_validation():
    with pytest.raises(ValueError):
        PairedSample((1.0, 2.0), (1.0,))
    with pytest.raises(ValueError):
        PairedSample((1.0,), (1.0,))
    with pytest.raises(ValueError):
        PairedSample((1.0, math.inf), (1.0, 2.0))


# -- correlation over logs ------------------------------------------------------------


def _log(entries):
    """entries: (presented measure, stars, MetricVector)."""
    records = [
        InteractionRecord(i, m, {"classes": []}, v, s, [0.0] * 4, [0.0, 0.0, 0.0, 0.0, 1.0]).to_dict()
        for i, (m, s, v) in enumerate(entries)
    ]
    return EpisodeLog(records)


def test_correlate_monotone_trace():
    values = [2.0, 1.5, 1.0, 0.7, 0.4, 0.2]
    stars = [1, 2, 3, 4, 5, 5]
    log = _log([("nac", s, MetricVector(0.5, v, 1.0 + i, 0.0, 0.3)) for i, (s, v) in enumerate(zip(stars, values))])
    m = correlate_logs([log])
    cell = m.cell("nac", "nac")
    assert cell.rho < -0.98 and cell.p < 0.01
    assert m.cell("nac", "iu").computable is False
    assert m.cell("ec", "nac").n == 0 and not m.cell("ec", "nac").computable


def test_correlate_strict_monotone_is_minus_one():
    log = _log([("ec", s, MetricVector(0.5, 0.0, v, 0.0, 0.0)) for s, v in zip([1, 2, 3, 4, 5], [9, 7, 5, 3, 1])])
    cell = correlate_logs([log]).cell("ec", "ec")
    assert cell.rho == -1.0 and cell.p == 0.0


def test_correlate_constant_designer_not_computable():
    rng = random.Random(2)
    entries = [(rng.choice(["nac", "ec", "iu", "atmr"]), 3, MetricVector(*(rng.random() for _ in range(5)))) for _ in range(40)]
    m = correlate_logs([_log(entries)])
    assert not any(c.computable for c in m.cells.values())
    assert len(m.cells) == 16


def test_correlate_needs_three_interactions():
    with pytest.raises(ValueError):
        correlate_logs([_log([("nac", 3, MetricVector(0, 0, 0, 0, 0))])])


def test_matrix_serialisation():
    log = _log([("ec", s, MetricVector(0.5, 0.0, v, 0.0, 0.0)) for s, v in zip([1, 2, 3, 4, 5], [9, 7, 5, 3, 1])])
    m = correlate_logs([log])
    d = m.to_dict()
    assert d["cells"]["ec_reward"]["ec_elegance"]["rho"] == -1.0
    tsv = m.to_tsv().splitlines()
    assert tsv[0].split("\t")[2:] == ["NAC elegance", "EC elegance", "IU elegance", "ATMR elegance"]
    assert len(tsv) == 1 + 4 * 3
