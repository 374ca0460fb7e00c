"""Disparity-filter backbone of the retweet network and its comparison with attentional degrees.

Under the null model a node's ``k`` link shares are uniform random splits of the
unit interval, so the probability that one share is at least ``p`` is
``(1 - p)**(k - 1)``. A link whose share beats the level ``alpha`` is kept.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import betainc

from .networks import RetweetNetwork


class Orientation(str, enum.Enum):
    INCOMING = "incoming"
    OUTGOING = "outgoing"


def default_grid() -> list[float]:
    """0.025, 0.050, ..., 0.975."""
    return [round(0.025 * i, 3) for i in range(1, 40)]


def edge_alpha(p: float, k: int) -> float:
    """Null-model probability of a share at least ``p`` among ``k`` links.

    A node's only link (``k == 1``) gets 0 so it always survives the filter.
    """
    if not 0 < p <= 1:
        raise ValueError(f"share must lie in (0, 1], got {p}")
    if k < 1:
        raise ValueError(f"degree must be >= 1, got {k}")
    if k == 1:
        return 0.0
    return (1.0 - p) ** (k - 1)


class EdgeSignificance(NamedTuple):
    u: str
    v: str
    w: int
    p: float
    alpha_ij: float
    orientation: Orientation


def edge_significance(rn: RetweetNetwork, orientation: Orientation | str = Orientation.INCOMING) -> list[EdgeSignificance]:
    """Share and significance of every edge, evaluated at the endpoint chosen by ``orientation``.

    ``incoming`` evaluates ``u -> v`` among the incoming links of ``v``;
    ``outgoing`` among the outgoing links of ``u``.
    """
    orientation = Orientation(orientation)
    table = rn.inc if orientation is Orientation.INCOMING else rn.out
    result = []
    for node in sorted(table):
        links = table[node]
        k = len(links)
        strength = sum(links.values())
        for other in sorted(links):
            w = links[other]
            p = w / strength
            u, v = (other, node) if orientation is Orientation.INCOMING else (node, other)
            result.append(EdgeSignificance(u, v, w, p, edge_alpha(p, k), orientation))
    return result


@dataclass
class BackboneResult:
    alpha: float
    orientation: Orientation
    edges: dict[tuple[str, str], int] = field(default_factory=dict)
    in_degree: dict[str, int] = field(default_factory=dict)
    out_degree: dict[str, int] = field(default_factory=dict)

    def degree(self, side: str) -> dict[str, int]:
        return self.in_degree if side == "in" else self.out_degree

    def as_network(self) -> RetweetNetwork:
        rn = RetweetNetwork()
        for (u, v), w in sorted(self.edges.items()):
            rn.add(u, v, w)
        return rn


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def _filter(significance: Sequence[EdgeSignificance], nodes, alpha: float,
            orientation: Orientation) -> BackboneResult:
    result = BackboneResult(alpha, orientation)
    result.in_degree = dict.fromkeys(nodes, 0)
    result.out_degree = dict.fromkeys(nodes, 0)
    for e in significance:
        if e.alpha_ij < alpha:
            result.edges[(e.u, e.v)] = e.w
            result.out_degree[e.u] += 1
            result.in_degree[e.v] += 1
    return result


def extract_backbone(rn: RetweetNetwork, alpha: float,
                     orientation: Orientation | str = Orientation.INCOMING) -> BackboneResult:
    """Edges whose significance ``alpha_ij`` is strictly below ``alpha``.

    Per-node backbone degrees are reported for every node of ``rn`` (0 when all
    its links were dropped).
    """
    _check_alpha(alpha)
    orientation = Orientation(orientation)
    if rn.n_edges == 0:
        raise ValueError("cannot filter an empty network")
    return _filter(edge_significance(rn, orientation), sorted(rn.nodes), alpha, orientation)


class UndefinedCorrelation(ValueError):
    pass


class Correlation(NamedTuple):
    r: float
    p_value: float


def pearson(x: Sequence[float], y: Sequence[float]) -> Correlation:
    """Product-moment correlation with a two-sided Student-t p-value.

    With ``df = n - 2`` the t statistic ``r * sqrt(df / (1 - r**2))`` has tail
    probability ``I_{1 - r**2}(df / 2, 1 / 2)`` (regularized incomplete beta).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    n = len(x)
    if n < 3:
        raise UndefinedCorrelation(f"need at least 3 points, got {n}")
    if x.min() == x.max() or y.min() == y.max():
        raise UndefinedCorrelation("constant input")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    p = float(betainc(df / 2.0, 0.5, 1.0 - r * r)) if abs(r) < 1 else 0.0
    return Correlation(r, min(max(p, 0.0), 1.0))


@dataclass
class SweepPoint:
    alpha: float
    r: float | None
    p_value: float | None
    edges_retained: int
    nodes_compared: int


@dataclass
class SweepResult:
    curve: list[SweepPoint]
    best_alpha: float | None

    def defined(self) -> list[SweepPoint]:
        return [pt for pt in self.curve if pt.r is not None]


def alpha_sweep(rn: RetweetNetwork, attentional: Mapping[str, float], grid: Sequence[float] | None = None,
                orientation: Orientation | str = Orientation.INCOMING) -> SweepResult:
    """Correlate backbone degrees with attentional degrees across a grid of ``alpha``.

    The backbone degree is taken on the side matching ``orientation`` (in-degree for
    ``incoming``). Nodes are compared when present in both maps. Grid points with
    fewer than 3 comparable nodes, or a constant side, have ``r = None``. The best
    alpha maximizes ``r``; ties go to the smaller alpha.
    """
    grid = default_grid() if grid is None else list(grid)
    if not grid:
        raise ValueError("empty alpha grid")
    for a in grid:
        _check_alpha(a)
    orientation = Orientation(orientation)
    if rn.n_edges == 0:
        raise ValueError("cannot filter an empty network")
    side = "in" if orientation is Orientation.INCOMING else "out"
    significance = edge_significance(rn, orientation)
    nodes = sorted(rn.nodes)
    compared = [u for u in nodes if u in attentional]
    att = [attentional[u] for u in compared]

    curve = []
    for a in grid:
        bb = _filter(significance, nodes, a, orientation)
        deg = bb.degree(side)
        r = p = None
        if len(compared) >= 3:
            try:
                r, p = pearson([deg[u] for u in compared], att)
            except UndefinedCorrelation:
                pass
        curve.append(SweepPoint(a, r, p, len(bb.edges), len(compared)))

    best = None
    for pt in sorted(curve, key=lambda pt: pt.alpha):
        if pt.r is not None and (best is None or pt.r > best.r):
            best = pt
    return SweepResult(curve, best.alpha if best else None)


def write_sweep(result: SweepResult, fh) -> None:
    fh.write("alpha,R,p_value,edges_retained,nodes_compared\n")
    for pt in result.curve:
        r = "" if pt.r is None else repr(pt.r)
        p = "" if pt.p_value is None else repr(pt.p_value)
        fh.write(f"{pt.alpha!r},{r},{p},{pt.edges_retained},{pt.nodes_compared}\n")
