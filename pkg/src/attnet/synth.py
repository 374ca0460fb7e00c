"""Seeded synthetic datasets with planted attention structure.

Every user retweets its followees according to planted shares. Each retweet
targets a fresh tweet posted by the chosen followee one second earlier, and no
other user touches that tweet, so the retweet network recovers the planted
choices exactly and the expected attentional degree is ``1 / sum(shares**2)``.

Users belong to ``n_communities`` groups. ``homophily`` is the probability that
a followee, and each hashtag slot of a tweet, is forced into the user's own
group; otherwise it is drawn uniformly from everyone (or the whole tag pool).

Randomness comes from numpy's ``PCG64`` bit generator seeded with ``seed``;
identical configurations give byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .events import Event, FollowEdge, Kind, write_events, write_follow_edges

T0 = 1_450_000_000


@dataclass
class SynthConfig:
    n_users: int = 100
    followees_per_user: int | list[int] = 10
    concentration: float = 0.0
    events_per_user: int = 50
    hashtag_pool: int = 200
    tags_per_event: int = 2
    homophily: float = 0.0
    seed: int = 0
    n_communities: int = 4
    shares: list[float] | None = None

    def validate(self) -> None:
        for name in ("n_users", "events_per_user", "hashtag_pool", "tags_per_event", "n_communities"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        lo, hi = self.followee_range
        if lo < 1 or lo > hi:
            raise ValueError(f"invalid followees_per_user {self.followees_per_user}")
        if hi >= self.n_users:
            raise ValueError("followees_per_user must be smaller than n_users")
        if self.tags_per_event > self.hashtag_pool:
            raise ValueError("tags_per_event exceeds hashtag_pool")
        for name in ("concentration", "homophily"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.shares is not None:
            if lo != hi or len(self.shares) != lo:
                raise ValueError("shares need a fixed followees_per_user equal to their length")
            if any(s < 0 for s in self.shares) or not math.isclose(sum(self.shares), 1.0):
                raise ValueError("shares must be non-negative and sum to 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def followee_range(self) -> tuple[int, int]:
        k = self.followees_per_user
        if isinstance(k, int):
            return k, k
        lo, hi = k
        return int(lo), int(hi)

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        with open(path) as fh:
            data = json.load(fh)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


class GroundTruth(NamedTuple):
    expected_a: float
    tolerance: float


def planted_shares(config: SynthConfig, k: int) -> np.ndarray:
    """Retweet shares over ``k`` followees, favourite first."""
    if config.shares is not None:
        return np.asarray(config.shares, dtype=float)
    c = config.concentration
    shares = np.full(k, (1.0 - c) / k)
    shares[0] += c
    return shares


def expected_degree(shares: Sequence[float], n_draws: int) -> GroundTruth:
    """Closed-form attentional degree of the planted shares with a sampling band.

    The band covers the finite-sample bias of the plug-in index,
    ``E[H_hat] = H + (1 - H) / N``, plus three delta-method standard deviations,
    ``Var[H_hat] ~ 4 (sum p^3 - H^2) / N`` with a second-order ``2 H (1 - H) / N^2``
    term that dominates near the even split.
    """
    p = np.asarray([s for s in shares if s > 0], dtype=float)
    h = float(np.sum(p * p))
    a = 1.0 / h
    bias = abs(a - 1.0 / (h + (1.0 - h) / n_draws))
    var_h = max(4.0 * (float(np.sum(p ** 3)) - h * h) / n_draws, 0.0) + 2.0 * h * (1.0 - h) / n_draws**2
    sd_a = math.sqrt(var_h) / (h * h)
    return GroundTruth(a, bias + 3.0 * sd_a)


@dataclass
class SynthDataset:
    config: SynthConfig
    follows: list[FollowEdge]
    events: list[Event]
    ground_truth: dict[str, GroundTruth]


def _user_name(i: int, n: int) -> str:
    return f"u{i:0{len(str(n - 1))}d}"


def generate(config: SynthConfig) -> SynthDataset:
    config.validate()
    rng = np.random.Generator(np.random.PCG64(config.seed))
    n = config.n_users
    names = [_user_name(i, n) for i in range(n)]
    community = np.arange(n) % config.n_communities
    members = [np.flatnonzero(community == c) for c in range(config.n_communities)]
    lo, hi = config.followee_range

    followees: list[np.ndarray] = []
    for u in range(n):
        k = int(rng.integers(lo, hi + 1))
        own = members[community[u]]
        own = own[own != u]
        k_own = min(int(rng.binomial(k, config.homophily)), len(own))
        local = rng.choice(own, size=k_own, replace=False)
        rest = np.setdiff1d(np.arange(n), np.append(local, u))
        picked = np.concatenate([local, rng.choice(rest, size=k - k_own, replace=False)]).astype(np.int64)
        followees.append(rng.permutation(picked))

    follows = [FollowEdge(names[u], names[v]) for u in range(n) for v in sorted(followees[u].tolist())]

    m = config.events_per_user
    retweeter = np.repeat(np.arange(n), m)
    target = np.empty(n * m, dtype=np.int64)
    truth = {}
    for u in range(n):
        shares = planted_shares(config, len(followees[u]))
        target[u * m:(u + 1) * m] = followees[u][rng.choice(len(shares), size=m, p=shares)]
        truth[names[u]] = expected_degree(shares, m)
    order = rng.permutation(n * m)
    retweeter, target = retweeter[order], target[order]

    # Hashtag pool split into contiguous community blocks.
    pool = config.hashtag_pool
    block = max(pool // config.n_communities, 1)
    slots = config.tags_per_event
    local = rng.random((n * m, slots)) < config.homophily
    block_start = (community[target] * block) % pool
    local_tag = (block_start[:, None] + rng.integers(0, block, size=(n * m, slots))) % pool
    global_tag = rng.integers(0, pool, size=(n * m, slots))
    tags = np.where(local, local_tag, global_tag)

    width = len(str(n * m - 1))
    events: list[Event] = []
    for i, (u, v, row) in enumerate(zip(retweeter.tolist(), target.tolist(), tags.tolist())):
        ts = T0 + 2 * i
        cid = f"t{i:0{width}d}"
        hashtags = tuple(dict.fromkeys(f"h{t}" for t in row))
        events.append(Event(names[v], ts, Kind.TWEET, cid, hashtags))
        events.append(Event(names[u], ts + 1, Kind.RETWEET, cid, hashtags))
    return SynthDataset(config, follows, events, truth)


def write_dataset(ds: SynthDataset, out_dir) -> dict[str, str]:
    """Write ``events.jsonl``, ``follows.csv``, ``ground_truth.csv`` and ``config.json``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, name)
             for name in ("events.jsonl", "follows.csv", "ground_truth.csv", "config.json")}
    with open(paths["events.jsonl"], "w", encoding="utf-8", newline="\n") as fh:
        write_events(ds.events, fh)
    with open(paths["follows.csv"], "w", encoding="utf-8", newline="\n") as fh:
        write_follow_edges(ds.follows, fh)
    with open(paths["ground_truth.csv"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write("user,expected_a,tolerance\n")
        for user in sorted(ds.ground_truth):
            gt = ds.ground_truth[user]
            fh.write(f"{user},{gt.expected_a!r},{gt.tolerance!r}\n")
    with open(paths["config.json"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(asdict(ds.config), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
