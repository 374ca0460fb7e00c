"""Concentration of social and semantic attention.

The attentional degree of a weight vector is the inverse of its
Herfindahl-Hirschman index: the number of "equivalent" neighbours (or hashtags)
among which attention is split. It ranges from 1 (everything on one entry) to
the vector length (even split).
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, fields
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .events import Event, Kind, TimeWindow, filter_window
from .networks import Activity, FollowerNetwork, RetweetNetwork, activity_counts


class UndefinedMetric(ValueError):
    """A concentration index was requested on an empty weight vector."""


def hhi(weights: Sequence[float]) -> float:
    """Herfindahl-Hirschman index: sum of squared shares, in ``[1/len, 1]``."""
    if len(weights) == 0:
        raise UndefinedMetric("HHI of an empty weight vector")
    total = math.fsum(weights)
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be strictly positive")
    if max(weights) == min(weights):
        return 1.0 / len(weights)
    return math.fsum(w * w for w in weights) / (total * total)


def attentional_degree(weights: Sequence[float]) -> float:
    """Inverse HHI of ``weights``, clamped into ``[1, len(weights)]`` against rounding."""
    h = hhi(weights)
    if max(weights) == min(weights):
        return float(len(weights))
    a = 1.0 / h
    return min(max(a, 1.0), float(len(weights)))


def social_attention(rn: RetweetNetwork, direction: str = "out") -> dict[str, float]:
    """Attentional degree of every user with at least one link on ``direction``.

    ``out`` (the default) uses the weights of the user's outgoing retweet links;
    ``in`` uses incoming weights and exists for comparison with in-degree backbones.
    """
    if direction == "out":
        table = rn.out
    elif direction == "in":
        table = rn.inc
    else:
        raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")
    return {u: attentional_degree(list(t.values())) for u, t in sorted(table.items()) if t}


class HashtagSource(str, enum.Enum):
    RETWEETS_ONLY = "retweets_only"
    ALL_POSTS = "all_posts"


@dataclass(frozen=True)
class HashtagProfile:
    user: str
    counts: Mapping[str, int]
    source: HashtagSource = HashtagSource.RETWEETS_ONLY

    def non_hapax(self) -> dict[str, int]:
        return {h: c for h, c in self.counts.items() if c >= 2}


def hashtag_profile(events: Iterable[Event], user: str,
                    source: HashtagSource | str = HashtagSource.RETWEETS_ONLY) -> HashtagProfile:
    """Raw hashtag occurrence counts for one user (hapaxes kept)."""
    return hashtag_profiles(events, source).get(user, HashtagProfile(user, {}, HashtagSource(source)))


def hashtag_profiles(events: Iterable[Event],
                     source: HashtagSource | str = HashtagSource.RETWEETS_ONLY) -> dict[str, HashtagProfile]:
    """Profiles of every user with at least one hashtag in the selected posts."""
    source = HashtagSource(source)
    only_rt = source is HashtagSource.RETWEETS_ONLY
    counters: dict[str, Counter] = {}
    for user, _ts, kind, _cid, tags in events:
        if not tags or (only_rt and kind is not Kind.RETWEET):
            continue
        c = counters.get(user)
        if c is None:
            c = counters[user] = Counter()
        c.update(tags)
    return {u: HashtagProfile(u, dict(sorted(c.items())), source) for u, c in sorted(counters.items())}


def semantic_attentional_degree(profile: HashtagProfile) -> float | None:
    """Inverse HHI over hashtags used at least twice; ``None`` when none qualifies."""
    kept = profile.non_hapax()
    if not kept:
        return None
    return attentional_degree(list(kept.values()))


def semantic_degree(profile: HashtagProfile, include_hapaxes: bool = True) -> int:
    """Number of distinct hashtags in the profile."""
    if include_hapaxes:
        return len(profile.counts)
    return len(profile.non_hapax())


class Balance(NamedTuple):
    retweet: float | None
    follower: float | None


def balances(f: FollowerNetwork, rn: RetweetNetwork) -> dict[str, Balance]:
    """Retweet balance ``kappa'/kappa`` and follower balance ``k'/k``; ``None`` when undefined."""
    out = {}
    for u in sorted(f.nodes | rn.nodes):
        kappa, k = rn.out_degree(u), f.out_degree(u)
        out[u] = Balance(
            rn.in_degree(u) / kappa if kappa else None,
            f.in_degree(u) / k if k else None,
        )
    return out


def jaccard(a: set, b: set) -> float:
    """``|a & b| / |a | b|``; two empty sets give 0."""
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def cdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Sorted distinct values with the fraction of values ``<=`` each."""
    if not len(values):
        return []
    arr = np.sort(np.asarray(values, dtype=float))
    uniq, idx = np.unique(arr, return_index=True)
    counts = np.diff(np.append(idx, len(arr)))
    cum = np.cumsum(counts) / len(arr)
    return [(float(v), float(c)) for v, c in zip(uniq, cum)]


@dataclass
class JaccardComparison:
    connected: list[float]
    random: list[float]
    connected_cdf: list[tuple[float, float]]
    random_cdf: list[tuple[float, float]]


def jaccard_comparison(rn: RetweetNetwork, tag_sets: Mapping[str, set], sample_size: int | None = None,
                       seed: int = 0) -> JaccardComparison:
    """Hashtag-set similarity along retweet links versus between random user pairs.

    Random pairs are drawn uniformly (with replacement) over unordered pairs of
    distinct retweet-network nodes using numpy's PCG64 generator seeded with ``seed``.
    ``sample_size`` defaults to the number of retweet links.
    """
    nodes = sorted(rn.nodes)
    if len(nodes) < 2:
        raise ValueError("need at least two nodes to sample random pairs")
    if sample_size is None:
        sample_size = rn.n_edges
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    empty: set = set()

    def sim(u, v):
        return jaccard(set(tag_sets.get(u, empty)), set(tag_sets.get(v, empty)))

    connected = [sim(u, v) for u, v, _w in rn.edges()]
    rng = np.random.Generator(np.random.PCG64(seed))
    n = len(nodes)
    first = rng.integers(0, n, size=sample_size)
    second = rng.integers(0, n - 1, size=sample_size)
    second = second + (second >= first)
    random_vals = [sim(nodes[i], nodes[j]) for i, j in zip(first.tolist(), second.tolist())]
    return JaccardComparison(connected, random_vals, cdf(connected), cdf(random_vals))


@dataclass
class UserMetrics:
    user: str
    k: int = 0
    k_in: int = 0
    kappa: int = 0
    kappa_in: int = 0
    s: int = 0
    s_in: int = 0
    a: float | None = None
    kappa_s: int = 0
    a_s: float | None = None
    n_tw: int = 0
    n_rt: int = 0
    n: int = 0
    rt_balance: float | None = None
    f_balance: float | None = None


METRIC_COLUMNS = [f.name for f in fields(UserMetrics)]
NUMERIC_FIELDS = METRIC_COLUMNS[1:]


def compute_user_metrics(
    f: FollowerNetwork,
    rn: RetweetNetwork,
    events: Iterable[Event],
    window: TimeWindow | None = None,
    hashtag_source: HashtagSource | str = HashtagSource.RETWEETS_ONLY,
    kappa_s_hapaxes: bool = True,
    users: Iterable[str] | None = None,
) -> dict[str, UserMetrics]:
    """Full per-user metric table, keyed and ordered by user token.

    ``users`` restricts the rows; by default every follower- or retweet-network node.
    """
    events = filter_window(events, window)
    activity = activity_counts(events)
    profiles = hashtag_profiles(events, hashtag_source)
    social = social_attention(rn)
    bal = balances(f, rn)
    universe = sorted(f.nodes | rn.nodes) if users is None else sorted(set(users))
    table = {}
    for u in universe:
        act = activity.get(u, Activity(0, 0))
        prof = profiles.get(u)
        b = bal.get(u, Balance(None, None))
        table[u] = UserMetrics(
            user=u,
            k=f.out_degree(u), k_in=f.in_degree(u),
            kappa=rn.out_degree(u), kappa_in=rn.in_degree(u),
            s=rn.out_strength(u), s_in=rn.in_strength(u),
            a=social.get(u),
            kappa_s=semantic_degree(prof, kappa_s_hapaxes) if prof else 0,
            a_s=semantic_attentional_degree(prof) if prof else None,
            n_tw=act.n_tw, n_rt=act.n_rt, n=act.n,
            rt_balance=b.retweet, f_balance=b.follower,
        )
    return table


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_metrics(metrics: Mapping[str, UserMetrics], fh) -> None:
    """CSV with a header; undefined values are empty cells."""
    fh.write(",".join(METRIC_COLUMNS) + "\n")
    for u in sorted(metrics):
        m = metrics[u]
        fh.write(",".join(_fmt(getattr(m, c)) for c in METRIC_COLUMNS) + "\n")


_INT_FIELDS = {f.name for f in fields(UserMetrics) if f.type in ("int",)}


def read_metrics(fh) -> dict[str, UserMetrics]:
    header = fh.readline().strip().split(",")
    if header != METRIC_COLUMNS:
        raise ValueError(f"unexpected metrics header: {header}")
    table = {}
    for lineno, line in enumerate(fh, start=2):
        line = line.rstrip("\n")
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(METRIC_COLUMNS):
            raise ValueError(f"line {lineno}: expected {len(METRIC_COLUMNS)} cells")
        values = {}
        for name, cell in zip(METRIC_COLUMNS, cells):
            if name == "user":
                values[name] = cell
            elif cell == "":
                values[name] = None
            elif name in _INT_FIELDS:
                values[name] = int(cell)
            else:
                values[name] = float(cell)
        table[values["user"]] = UserMetrics(**values)
    return table
