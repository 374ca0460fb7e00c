"""Follower (potential attention) and retweet (actual attention) networks.

A retweet link ``u -> v`` exists only along a follower link ``u -> v`` and its
weight counts the retweets by ``u`` of content that ``v`` had already tweeted or
retweeted at a strictly earlier time inside the same window. One retweet may
credit several followees at once, so ``s_u`` can exceed ``u``'s retweet count.
"""

from __future__ import annotations

from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Iterator, NamedTuple

from .events import Event, FollowEdge, Kind, TimeWindow, filter_window


class FollowerNetwork:
    """Directed unweighted subscription graph; ``u -> v`` means u follows v."""

    def __init__(self, edges: Iterable[FollowEdge] = ()):
        self.followees: dict[str, set[str]] = defaultdict(set)
        self.followers: dict[str, set[str]] = defaultdict(set)
        self.n_edges = 0
        for follower, followee in edges:
            if follower == followee:
                raise ValueError(f"self-loop on {follower!r}")
            out = self.followees[follower]
            if followee in out:
                continue
            out.add(followee)
            self.followers[followee].add(follower)
            self.n_edges += 1

    @property
    def nodes(self) -> set[str]:
        return set(self.followees) | set(self.followers)

    def out_degree(self, user: str) -> int:
        """``k_u``: number of followees."""
        out = self.followees.get(user)
        return len(out) if out else 0

    def in_degree(self, user: str) -> int:
        """``k'_u``: number of followers."""
        inc = self.followers.get(user)
        return len(inc) if inc else 0

    def has_edge(self, u: str, v: str) -> bool:
        out = self.followees.get(u)
        return out is not None and v in out

    def edges(self) -> Iterator[tuple[str, str]]:
        """All edges in sorted order."""
        for u in sorted(self.followees):
            for v in sorted(self.followees[u]):
                yield u, v


class RetweetNetwork:
    """Directed weighted graph of temporally valid retweets along follower links."""

    def __init__(self, weights: dict[str, dict[str, int]] | None = None):
        self.out: dict[str, dict[str, int]] = {}
        self.inc: dict[str, dict[str, int]] = {}
        for u, targets in (weights or {}).items():
            for v, w in targets.items():
                self.add(u, v, w)

    def add(self, u: str, v: str, w: int) -> None:
        if w < 1:
            raise ValueError(f"edge weight must be >= 1, got {w} on {u}->{v}")
        self.out.setdefault(u, {})
        self.inc.setdefault(v, {})
        self.out[u][v] = self.out[u].get(v, 0) + w
        self.inc[v][u] = self.out[u][v]

    @property
    def nodes(self) -> set[str]:
        return set(self.out) | set(self.inc)

    @property
    def n_edges(self) -> int:
        return sum(len(t) for t in self.out.values())

    def weight(self, u: str, v: str) -> int:
        return self.out.get(u, {}).get(v, 0)

    def out_degree(self, user: str) -> int:
        """``kappa_u``: number of users whom ``user`` retweeted."""
        return len(self.out.get(user, ()))

    def in_degree(self, user: str) -> int:
        return len(self.inc.get(user, ()))

    def out_strength(self, user: str) -> int:
        return sum(self.out.get(user, {}).values())

    def in_strength(self, user: str) -> int:
        return sum(self.inc.get(user, {}).values())

    def out_weights(self, user: str) -> list[int]:
        return list(self.out.get(user, {}).values())

    def in_weights(self, user: str) -> list[int]:
        return list(self.inc.get(user, {}).values())

    def edges(self) -> Iterator[tuple[str, str, int]]:
        for u in sorted(self.out):
            targets = self.out[u]
            for v in sorted(targets):
                yield u, v, targets[v]

    def as_dict(self) -> dict[str, dict[str, int]]:
        return {u: dict(t) for u, t in self.out.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, RetweetNetwork):
            return NotImplemented
        return self.out == other.out


def build_follower_network(edges: Iterable[FollowEdge]) -> FollowerNetwork:
    return FollowerNetwork(edges)


def _first_seen(events: list[Event]) -> dict[str, dict[str, int]]:
    """content id -> user -> earliest timestamp of any event by that user on it."""
    first: dict[str, dict[str, int]] = defaultdict(dict)
    for user, ts, _kind, cid, _tags in events:
        seen = first[cid]
        prev = seen.get(user)
        if prev is None or ts < prev:
            seen[user] = ts
    return first


def _credit(followees, retweets, first) -> dict[str, int]:
    weights: dict[str, int] = {}
    for ts, cid in retweets:
        seen = first[cid]
        if len(seen) <= len(followees):
            for v, t_v in seen.items():
                if t_v < ts and v in followees:
                    weights[v] = weights.get(v, 0) + 1
        else:
            for v in followees:
                t_v = seen.get(v)
                if t_v is not None and t_v < ts:
                    weights[v] = weights.get(v, 0) + 1
    return weights


def build_retweet_network(
    f: FollowerNetwork,
    events: Iterable[Event],
    window: TimeWindow | None = None,
    threads: int = 1,
) -> RetweetNetwork:
    """Build the retweet network of ``events`` inside ``window`` on top of ``f``.

    For every follower link ``u -> v``, each retweet by ``u`` of content ``c``
    adds 1 to ``w_uv`` when ``v`` has any event on ``c`` strictly earlier in the
    window. Work is sharded by retweeting user; the result does not depend on
    ``threads``.
    """
    events = filter_window(events, window)
    first = _first_seen(events)

    retweets: dict[str, list[tuple[int, str]]] = defaultdict(list)
    followees = f.followees
    for user, ts, kind, cid, _tags in events:
        if kind is Kind.RETWEET and user in followees:
            retweets[user].append((ts, cid))

    users = sorted(retweets)

    def run(shard: list[str]) -> list[tuple[str, dict[str, int]]]:
        return [(u, _credit(followees[u], retweets[u], first)) for u in shard]

    threads = max(1, int(threads))
    if threads == 1:
        parts = [run(users)]
    else:
        size = -(-len(users) // threads) or 1
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, [users[i:i + size] for i in range(0, len(users), size)]))

    rn = RetweetNetwork()
    for part in parts:
        for u, weights in part:
            for v in sorted(weights):
                rn.add(u, v, weights[v])
    return rn


class Activity(NamedTuple):
    n_tw: int
    n_rt: int

    @property
    def n(self) -> int:
        return self.n_tw + self.n_rt


def activity_counts(events: Iterable[Event], window: TimeWindow | None = None) -> dict[str, Activity]:
    """Per-user tweet and retweet counts inside the window; silent users are absent."""
    tw: dict[str, int] = defaultdict(int)
    rt: dict[str, int] = defaultdict(int)
    for e in filter_window(events, window):
        if e.kind is Kind.RETWEET:
            rt[e.user_id] += 1
        else:
            tw[e.user_id] += 1
    return {u: Activity(tw.get(u, 0), rt.get(u, 0)) for u in sorted(set(tw) | set(rt))}


# --- CSV import/export -----------------------------------------------------

NODE_COLUMNS = ["user", "k", "k_in", "kappa", "kappa_in", "s", "s_in", "n_tw", "n_rt"]


def write_follower_network(f: FollowerNetwork, fh) -> None:
    for u, v in f.edges():
        fh.write(f"{u},{v}\n")


def write_retweet_network(rn: RetweetNetwork, fh) -> None:
    for u, v, w in rn.edges():
        fh.write(f"{u},{v},{w}\n")


def read_retweet_network(fh) -> RetweetNetwork:
    rn = RetweetNetwork()
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 'u,v,w'")
        rn.add(parts[0], parts[1], int(parts[2]))
    return rn


def read_follower_network(fh) -> FollowerNetwork:
    edges = []
    for lineno, line in enumerate(fh, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u,v'")
        edges.append(FollowEdge(parts[0], parts[1]))
    return FollowerNetwork(edges)


def node_table(f: FollowerNetwork, rn: RetweetNetwork, activity: dict[str, Activity]) -> list[list]:
    """Rows of the node metrics table, one per follower-network node, sorted by user."""
    rows = []
    for u in sorted(f.nodes | rn.nodes):
        act = activity.get(u, Activity(0, 0))
        rows.append([
            u, f.out_degree(u), f.in_degree(u),
            rn.out_degree(u), rn.in_degree(u), rn.out_strength(u), rn.in_strength(u),
            act.n_tw, act.n_rt,
        ])
    return rows
