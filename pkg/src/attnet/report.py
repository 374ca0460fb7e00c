"""Distributions, role quadrants, activity-binned correlations and plot-ready tables."""

from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .attention import NUMERIC_FIELDS, UserMetrics
from .backbone import UndefinedCorrelation, pearson

DEFAULT_ACTIVITY_BOUNDARIES = (1, 40, 200, 600, 6107)


@dataclass(frozen=True)
class ActivityBins:
    """Consecutive activity ranges ``[b0, b1), [b1, b2), ..., [b_{m-1}, b_m]``.

    The last range includes its upper boundary, so the default boundaries give
    ``[1,40) [40,200) [200,600) [600,6107]``.
    """

    boundaries: tuple[int, ...] = DEFAULT_ACTIVITY_BOUNDARIES

    def __post_init__(self):
        b = tuple(int(x) for x in self.boundaries)
        if len(b) < 2:
            raise ValueError("need at least two bin boundaries")
        if any(lo >= hi for lo, hi in zip(b, b[1:])):
            raise ValueError(f"bin boundaries must be strictly ascending: {b}")
        object.__setattr__(self, "boundaries", b)

    @classmethod
    def parse(cls, text: str) -> "ActivityBins":
        return cls(tuple(int(x) for x in text.split(",") if x.strip()))

    @property
    def ranges(self) -> list[tuple[int, int]]:
        b = self.boundaries
        return list(zip(b, b[1:]))

    def labels(self) -> list[str]:
        last = len(self.ranges) - 1
        return [f"[{lo},{hi}{']' if i == last else ')'}" for i, (lo, hi) in enumerate(self.ranges)]

    def index(self, value: float) -> int | None:
        b = self.boundaries
        if value < b[0] or value > b[-1]:
            return None
        if value == b[-1]:
            return len(b) - 2
        i = int(np.searchsorted(b, value, side="right")) - 1
        return i


class RoleQuadrant(str, enum.Enum):
    STRONG_INFLUENCER = "StrongInfluencer"
    NORMAL_USER = "NormalUser"
    HIDDEN_INFLUENTIAL = "HiddenInfluential"
    FAKE_INFLUENTIAL = "FakeInfluential"


def ccdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Sorted distinct values with the fraction of values ``>=`` each."""
    if not len(values):
        return []
    arr = np.sort(np.asarray(values, dtype=float))
    uniq, first = np.unique(arr, return_index=True)
    frac = (len(arr) - first) / len(arr)
    return [(float(v), float(f)) for v, f in zip(uniq, frac)]


@dataclass
class Histogram2D:
    bins_per_decade: int
    counts: dict[tuple[int, int], int]
    dropped: int

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def rows(self) -> list[tuple[float, float, int]]:
        """``(x_bin_low, y_bin_low, count)`` sorted by bin."""
        d = self.bins_per_decade
        return [(10 ** (i / d), 10 ** (j / d), c) for (i, j), c in sorted(self.counts.items())]


def _log_bin(v: float, per_decade: int) -> int:
    # The epsilon keeps exact powers of ten (e.g. 1000) in their own bin.
    return math.floor(math.log10(v) * per_decade + 1e-9)


def log_histogram2d(x: Sequence[float], y: Sequence[float], bins_per_decade: int = 10) -> Histogram2D:
    """Counts over log10-spaced rectangular bins; pairs with a non-positive or missing side are dropped."""
    if len(x) != len(y):
        raise ValueError("x and y must have the same length")
    if bins_per_decade < 1:
        raise ValueError("bins_per_decade must be >= 1")
    counts: Counter = Counter()
    dropped = 0
    for xv, yv in zip(x, y):
        if xv is None or yv is None or not xv > 0 or not yv > 0:
            dropped += 1
            continue
        counts[(_log_bin(xv, bins_per_decade), _log_bin(yv, bins_per_decade))] += 1
    return Histogram2D(bins_per_decade, dict(counts), dropped)


def classify_role(rt_balance: float, f_balance: float) -> RoleQuadrant:
    if rt_balance > 1:
        return RoleQuadrant.STRONG_INFLUENCER if f_balance > 1 else RoleQuadrant.HIDDEN_INFLUENTIAL
    return RoleQuadrant.FAKE_INFLUENTIAL if f_balance > 1 else RoleQuadrant.NORMAL_USER


def classify_roles(metrics: Mapping[str, UserMetrics]) -> dict[str, RoleQuadrant]:
    """Quadrant of every user whose two balances are defined; a balance of exactly 1 counts as low."""
    return {
        u: classify_role(m.rt_balance, m.f_balance)
        for u, m in sorted(metrics.items())
        if m.rt_balance is not None and m.f_balance is not None
    }


def _field(m: UserMetrics, name: str):
    if name not in NUMERIC_FIELDS:
        raise ValueError(f"unknown metric field {name!r}")
    return getattr(m, name)


class BinCorrelation(NamedTuple):
    label: str
    low: int
    high: int
    n_users: int
    r: float | None
    p_value: float | None


def binned_correlation(metrics: Mapping[str, UserMetrics], x_field: str = "a", y_field: str = "a_s",
                       bins: ActivityBins = ActivityBins(), activity_field: str = "n") -> list[BinCorrelation]:
    """Pearson correlation of two metrics within each activity bin.

    ``n_users`` counts users in the bin with both fields defined. Bins with fewer
    than 3 such users, or a constant field, have ``r = p_value = None``.
    """
    groups: dict[int, tuple[list, list]] = defaultdict(lambda: ([], []))
    for u in sorted(metrics):
        m = metrics[u]
        xv, yv = _field(m, x_field), _field(m, y_field)
        if xv is None or yv is None:
            continue
        i = bins.index(_field(m, activity_field))
        if i is None:
            continue
        groups[i][0].append(xv)
        groups[i][1].append(yv)

    table = []
    for i, (label, (lo, hi)) in enumerate(zip(bins.labels(), bins.ranges)):
        xs, ys = groups.get(i, ([], []))
        r = p = None
        try:
            r, p = pearson(xs, ys)
        except UndefinedCorrelation:
            pass
        table.append(BinCorrelation(label, lo, hi, len(xs), r, p))
    return table


class BoxStats(NamedTuple):
    n: int
    q1: float
    median: float
    q3: float
    whisker_low: float
    whisker_high: float
    outlier_count: int


def box_stats(values: Sequence[float]) -> BoxStats | None:
    """Linearly interpolated quartiles; whiskers at the extreme points within 1.5 IQR of the box."""
    if not len(values):
        return None
    arr = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = (float(q) for q in np.percentile(arr, [25, 50, 75], method="linear"))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = arr[(arr >= lo_fence) & (arr <= hi_fence)]
    return BoxStats(len(arr), q1, med, q3, float(inside[0]), float(inside[-1]), int(len(arr) - len(inside)))


def boxplot_stats(groups: Mapping[str, Sequence[float]]) -> dict[str, BoxStats | None]:
    return {label: box_stats(vals) for label, vals in groups.items()}


def attention_ratio_vs_activity(metrics: Mapping[str, UserMetrics], numerator_field: str = "a",
                                denominator_field: str = "kappa", bins: ActivityBins = ActivityBins(),
                                activity_field: str = "n") -> dict[str, BoxStats | None]:
    """Box statistics of ``numerator / denominator`` per activity bin.

    Serves both ``a / kappa`` and ``a_s / kappa_s``; users with an undefined
    numerator or a zero denominator are skipped.
    """
    groups: dict[str, list[float]] = {label: [] for label in bins.labels()}
    labels = bins.labels()
    for u in sorted(metrics):
        m = metrics[u]
        num, den = _field(m, numerator_field), _field(m, denominator_field)
        if num is None or not den:
            continue
        i = bins.index(_field(m, activity_field))
        if i is not None:
            groups[labels[i]].append(num / den)
    return boxplot_stats(groups)


def grouped_box_stats(metrics: Mapping[str, UserMetrics], value_field: str, group_field: str,
                      bins_per_decade: int = 1) -> dict[str, BoxStats | None]:
    """Box statistics of ``value_field`` grouped by log bins of ``group_field``."""
    groups: dict[int, list[float]] = defaultdict(list)
    for u in sorted(metrics):
        m = metrics[u]
        val, key = _field(m, value_field), _field(m, group_field)
        if val is None or key is None or key <= 0:
            continue
        groups[_log_bin(key, bins_per_decade)].append(val)
    return {f"{10 ** (i / bins_per_decade):.6g}": box_stats(groups[i]) for i in sorted(groups)}


# --- file output -----------------------------------------------------------

CCDF_FIELDS = ("k", "k_in", "kappa", "kappa_in", "a", "n_rt", "n", "kappa_s", "a_s", "rt_balance", "f_balance")
HEATMAPS = (("k", "a"), ("kappa", "a"), ("kappa_s", "a_s"), ("f_balance", "rt_balance"))
BOX_COLUMNS = ("group", "n", "q1", "median", "q3", "whisker_low", "whisker_high", "outlier_count")


def _num(v) -> str:
    return "" if v is None else repr(float(v)) if isinstance(v, float) else str(v)


def _write_rows(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_num(v) for v in row) + "\n")


def _write_boxes(path, stats: Mapping[str, BoxStats | None]) -> None:
    _write_rows(path, BOX_COLUMNS,
                [(g, *s) if s else (g, 0, None, None, None, None, None, 0) for g, s in stats.items()])


def _ratio_rows(metrics, num, den):
    xs, ys = [], []
    for u in sorted(metrics):
        m = metrics[u]
        a, d = getattr(m, num), getattr(m, den)
        if a is not None and d:
            xs.append(m.n)
            ys.append(a / d)
    return xs, ys


def write_report(metrics: Mapping[str, UserMetrics], bins: ActivityBins, out_dir: str,
                 bins_per_decade: int = 10) -> list[str]:
    """Write every report table plus ``summary.json``; returns the file names written."""
    import json
    import os

    written = []

    def path(name):
        written.append(name)
        return os.path.join(out_dir, name)

    users = sorted(metrics)
    roles = classify_roles(metrics)
    _write_rows(path("quadrants.csv"), ("user", "role"), [(u, r.value) for u, r in roles.items()])

    corr = binned_correlation(metrics, "a", "a_s", bins)
    _write_rows(path("correlations.csv"), ("bin", "low", "high", "n_users", "R", "p_value"),
                [tuple(c) for c in corr])

    for name in CCDF_FIELDS:
        vals = [getattr(metrics[u], name) for u in users]
        _write_rows(path(f"ccdf_{name}.csv"), ("value", "ccdf"), ccdf([v for v in vals if v is not None]))

    hist_header = ("x_bin_low", "y_bin_low", "count")
    for xf, yf in HEATMAPS:
        h = log_histogram2d([getattr(metrics[u], xf) for u in users],
                            [getattr(metrics[u], yf) for u in users], bins_per_decade)
        _write_rows(path(f"heatmap_{yf}_vs_{xf}.csv"), hist_header, h.rows())
    for num, den in (("a", "kappa"), ("a_s", "kappa_s")):
        xs, ys = _ratio_rows(metrics, num, den)
        _write_rows(path(f"heatmap_{num}_over_{den}_vs_n.csv"), hist_header,
                    log_histogram2d(xs, ys, bins_per_decade).rows())
        _write_boxes(path(f"box_{num}_over_{den}_by_activity.csv"),
                     attention_ratio_vs_activity(metrics, num, den, bins))

    for i, (lo, hi) in enumerate(bins.ranges):
        in_bin = {u: m for u, m in metrics.items() if bins.index(m.n) == i}
        h = log_histogram2d([in_bin[u].a for u in sorted(in_bin)], [in_bin[u].a_s for u in sorted(in_bin)],
                            bins_per_decade)
        _write_rows(path(f"heatmap_a_s_vs_a_bin{i}.csv"), hist_header, h.rows())
        _write_boxes(path(f"box_a_s_by_a_bin{i}.csv"), grouped_box_stats(in_bin, "a_s", "a"))

    quadrant_counts = Counter(r.value for r in roles.values())
    summary = {
        "users": len(users),
        "edges_follower": sum(metrics[u].k for u in users),
        "edges_retweet": sum(metrics[u].kappa for u in users),
        "quadrants": {q.value: quadrant_counts.get(q.value, 0) for q in RoleQuadrant},
        "bins": [{"range": c.label, "n": c.n_users, "R": c.r, "p": c.p_value} for c in corr],
    }
    with open(path("summary.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return written
