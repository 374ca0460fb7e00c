import pytest
from hypothesis import given, strategies as st

from attnet.attention import UserMetrics
from attnet.backbone import pearson
from attnet.report import (ActivityBins, RoleQuadrant, attention_ratio_vs_activity, binned_correlation,
                           box_stats, boxplot_stats, ccdf, classify_roles, log_histogram2d)


def test_ccdf_examples():
    assert ccdf([1, 2, 2, 4]) == [(1.0, 1.0), (2.0, 0.75), (4.0, 0.25)]
    assert ccdf([3.5]) == [(3.5, 1.0)]
    assert ccdf([]) == []


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=100))
def test_ccdf_weakly_decreasing(values):
    fr = [f for _, f in ccdf(values)]
    assert fr[0] == 1.0
    assert all(a >= b for a, b in zip(fr, fr[1:]))


def test_histogram():
    h = log_histogram2d([5.0], [20.0])
    assert h.total == 1 and len(h.counts) == 1
    h = log_histogram2d([3.0] * 100, [7.0] * 100)
    assert list(h.counts.values()) == [100]
    h = log_histogram2d([1, 0, -2, 1000, None], [1, 1, 1, 1000, 4])
    assert h.dropped == 3 and h.total == 2
    assert h.rows()[-1] == (pytest.approx(1000.0), pytest.approx(1000.0), 1)


@given(st.lists(st.tuples(st.floats(-10, 1e6), st.floats(-10, 1e6)), max_size=100), st.integers(1, 20))
def test_histogram_conservation(pairs, bpd):
    xs = [p[0] for p in pairs]
    ys = [p[1] for p in pairs]
    h = log_histogram2d(xs, ys, bpd)
    assert h.total == len(pairs) - h.dropped


def metrics_with(**balances):
    return {u: UserMetrics(u, rt_balance=r, f_balance=f) for u, (r, f) in balances.items()}


def test_roles():
    roles = classify_roles(metrics_with(a=(5, 3), b=(0.2, 0.5), c=(4, 0.5), d=(0.5, 4), e=(1, 1), f=(None, 2)))
    assert roles == {
        "a": RoleQuadrant.STRONG_INFLUENCER, "b": RoleQuadrant.NORMAL_USER,
        "c": RoleQuadrant.HIDDEN_INFLUENTIAL, "d": RoleQuadrant.FAKE_INFLUENTIAL,
        "e": RoleQuadrant.NORMAL_USER,
    }


def test_default_bins():
    bins = ActivityBins()
    assert bins.labels() == ["[1,40)", "[40,200)", "[200,600)", "[600,6107]"]
    assert [bins.index(v) for v in (0, 1, 39, 40, 599, 600, 6107, 6108)] == [None, 0, 0, 1, 2, 3, 3, None]
    with pytest.raises(ValueError):
        ActivityBins((5,))
    with pytest.raises(ValueError):
        ActivityBins((1, 1, 3))


def test_binned_correlation():
    table = {f"u{i}": UserMetrics(f"u{i}", a=float(i), a_s=float(i), n=10) for i in range(1, 6)}
    rows = binned_correlation(table, bins=ActivityBins((1, 100)))
    assert len(rows) == 1 and rows[0].r == pytest.approx(1.0) and rows[0].n_users == 5
    rows = binned_correlation(table)
    assert rows[0].n_users == 5 and rows[1].r is None and rows[1].n_users == 0


def test_single_bin_equals_pearson():
    table = {f"u{i}": UserMetrics(f"u{i}", a=float(i % 7 + 1), a_s=float((i * 3) % 5 + 1), n=i + 1)
             for i in range(50)}
    row = binned_correlation(table, bins=ActivityBins((0, 10**6)))[0]
    ref = pearson([m.a for m in table.values()], [m.a_s for m in table.values()])
    assert (row.r, row.p_value) == pytest.approx(ref)


def test_box_stats():
    s = box_stats(list(range(1, 10)))
    assert (s.q1, s.median, s.q3) == (3.0, 5.0, 7.0)
    assert (s.whisker_low, s.whisker_high, s.outlier_count) == (1.0, 9.0, 0)
    s = box_stats([4.0] * 6)
    assert set(s[1:6]) == {4.0} and s.outlier_count == 0
    s = box_stats([2.5])
    assert set(s[1:6]) == {2.5}
    s = box_stats([1, 2, 3, 4, 100])
    assert s.outlier_count == 1 and s.whisker_high == 4.0
    assert boxplot_stats({"g": [], "h": [1]})["g"] is None


def test_attention_ratio():
    table = {
        "even": UserMetrics("even", a=3.0, kappa=3, n=10),
        "focus": UserMetrics("focus", a=1.0, kappa=10, n=10),
        "none": UserMetrics("none", a=None, kappa=0, n=10),
    }
    stats = attention_ratio_vs_activity(table, bins=ActivityBins((1, 100)))
    s = stats["[1,100]"]
    assert s.n == 2 and s.whisker_low == 0.1 and s.whisker_high == 1.0
