"""Rank-quality and error metrics against a float64 golden run.

All comparisons are per personalization request: one golden ordering (score
descending, ties broken by vertex id ascending) against one candidate
ordering produced by a reduced-precision run. Cutoff metrics look at the
top N of each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class CutoffTooLargeError(ValueError):
    """Asked for top-N beyond the available ordering."""


class MissingRelevanceError(ValueError):
    """A candidate vertex has no position in the golden ordering."""


def order_by_score(scores: np.ndarray, n: int | None = None) -> np.ndarray:
    """Vertex ids sorted by score descending, ties by id ascending."""
    scores = np.asarray(scores)
    ids = np.arange(len(scores))
    order = np.lexsort((ids, -scores))
    return order if n is None else order[:n]


@dataclass
class RankingPair:
    """Golden and candidate orderings (plus optional full score vectors)."""

    golden_order: np.ndarray
    candidate_order: np.ndarray
    golden_scores: np.ndarray | None = None
    candidate_scores: np.ndarray | None = None
    num_vertices: int | None = None

    def __post_init__(self) -> None:
        self.golden_order = np.asarray(self.golden_order, dtype=np.int64)
        self.candidate_order = np.asarray(self.candidate_order, dtype=np.int64)
        if self.num_vertices is None:
            if self.golden_scores is not None:
                self.num_vertices = len(self.golden_scores)
            else:
                hi = max(self.golden_order.max(), self.candidate_order.max())
                self.num_vertices = int(hi) + 1

    def _top(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        if n < 1:
            raise ValueError(f"cutoff must be positive, got {n}")
        if n > len(self.golden_order) or n > len(self.candidate_order):
            raise CutoffTooLargeError(
                f"cutoff {n} exceeds orderings of {len(self.golden_order)} "
                f"and {len(self.candidate_order)}"
            )
        return self.golden_order[:n], self.candidate_order[:n]


def errors_at(pair: RankingPair, n: int) -> int:
    """Positions i < n where the two orderings name different vertices."""
    g, c = pair._top(n)
    return int(np.count_nonzero(g != c))


def edit_distance_at(pair: RankingPair, n: int) -> int:
    """Levenshtein distance from golden top-n to the cheapest candidate prefix.

    The candidate may match with fewer than n items, so the distance is the
    minimum over all candidate prefixes of length 0..n. A pure rotation of
    one element therefore costs 1, not 2.
    """
    g, c = pair._top(n)
    prev = list(range(n + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * n
        gi = g[i - 1]
        for j in range(1, n + 1):
            cost = 0 if gi == c[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return min(prev)


def precision_at(pair: RankingPair, n: int) -> float:
    """Fraction of the golden top-n present anywhere in the candidate top-n."""
    g, c = pair._top(n)
    return len(np.intersect1d(g, c)) / n


def ndcg(pair: RankingPair, n: int | None = None) -> float:
    """Discounted cumulative gain against the ideal (golden) ordering.

    Relevance of a vertex is |V| minus its golden position, so the golden
    ordering itself scores exactly 1. Requires every candidate vertex in the
    cutoff to appear somewhere in the golden ordering.
    """
    if n is None:
        n = min(len(pair.golden_order), len(pair.candidate_order))
    g, c = pair._top(n)
    v = pair.num_vertices
    pos = np.full(v, -1, dtype=np.int64)
    pos[pair.golden_order] = np.arange(len(pair.golden_order))
    cand_pos = pos[c]
    if np.any(cand_pos < 0):
        raise MissingRelevanceError("candidate vertex missing from the golden ordering")
    discount = np.log2(np.arange(n, dtype=np.float64) + 2.0)
    dcg = np.sum((v - cand_pos) / discount)
    idcg = np.sum((v - pos[g]) / discount)
    return float(dcg / idcg)


def mae(pair: RankingPair) -> float:
    """Mean absolute score difference over all vertices."""
    if pair.golden_scores is None or pair.candidate_scores is None:
        raise ValueError("mae needs both full score vectors")
    g = np.asarray(pair.golden_scores, dtype=np.float64)
    c = np.asarray(pair.candidate_scores, dtype=np.float64)
    if g.shape != c.shape:
        raise ValueError(f"score shapes differ: {g.shape} vs {c.shape}")
    return float(np.mean(np.abs(g - c)))


_INV_BLOCK = 64


def _strict_inversions(a: np.ndarray) -> int:
    """Pairs i < j with a[i] > a[j], by bottom-up counting merges.

    Leaf blocks are counted with one broadcast compare; the merge passes then
    add cross-block inversions via searchsorted on already-sorted halves, so
    python-level iteration stays O(n / block).
    """
    n = len(a)
    if n < 2:
        return 0
    count = 0
    nb = n // _INV_BLOCK
    if nb:
        blocks = a[: nb * _INV_BLOCK].reshape(nb, _INV_BLOCK)
        upper = np.triu(np.ones((_INV_BLOCK, _INV_BLOCK), dtype=bool), k=1)
        count += int((blocks[:, :, None] > blocks[:, None, :])[:, upper].sum())
    tail = a[nb * _INV_BLOCK :]
    if len(tail) > 1:
        count += int(np.triu(tail[:, None] > tail[None, :], k=1).sum())

    buf = a.copy()
    if nb:
        buf[: nb * _INV_BLOCK].reshape(nb, _INV_BLOCK).sort(axis=1)
    buf[nb * _INV_BLOCK :].sort()
    width = _INV_BLOCK
    while width < n:
        for lo in range(0, n - width, 2 * width):
            mid = lo + width
            hi = min(lo + 2 * width, n)
            left = buf[lo:mid]
            right = buf[mid:hi]
            count += int((len(left) - np.searchsorted(left, right, side="right")).sum())
            buf[lo:hi] = np.sort(np.concatenate([left, right]), kind="stable")
        width *= 2
    return count


def _tie_pairs(sorted_vals: np.ndarray) -> int:
    """Sum of t*(t-1)/2 over runs of equal values (input must be sorted)."""
    if len(sorted_vals) == 0:
        return 0
    boundaries = np.flatnonzero(sorted_vals[1:] != sorted_vals[:-1])
    runs = np.diff(np.concatenate([[0], boundaries + 1, [len(sorted_vals)]]))
    return int((runs * (runs - 1) // 2).sum())


def kendall_tau(pair: RankingPair) -> float:
    """Kendall tau-b between the full score vectors (ties handled).

    Pair counts are exact integers combined under a single square root, so
    untied identical vectors give exactly 1.0 and an untied reversal exactly
    -1.0. Returns nan when either vector is constant.
    """
    if pair.golden_scores is None or pair.candidate_scores is None:
        raise ValueError("kendall_tau needs both full score vectors")
    x = np.asarray(pair.golden_scores)
    y = np.asarray(pair.candidate_scores)
    if x.shape != y.shape:
        raise ValueError(f"score shapes differ: {x.shape} vs {y.shape}")
    n = len(x)
    perm = np.lexsort((y, x))
    xs, ys = x[perm], y[perm]
    # with x ties pre-sorted by y, discordant pairs are exactly the strict
    # inversions of ys, and same-x pairs contribute none
    dis = _strict_inversions(ys)
    n0 = n * (n - 1) // 2
    n1 = _tie_pairs(xs)
    n2 = _tie_pairs(np.sort(y))
    changed = np.flatnonzero((xs[1:] != xs[:-1]) | (ys[1:] != ys[:-1]))
    joint_runs = np.diff(np.concatenate([[0], changed + 1, [n]]))
    n3 = int((joint_runs * (joint_runs - 1) // 2).sum())
    denom_sq = (n0 - n1) * (n0 - n2)
    if denom_sq <= 0:
        return float("nan")
    num = (n0 - n1 - n2 + n3) - 2 * dis
    return num / math.sqrt(denom_sq)


def convergence_norms(trace, reduce: str | None = "mean") -> np.ndarray:
    """Per-iteration L2 norms from a ConvergenceTrace (or a raw (T, k) array).

    reduce=None keeps the per-column matrix; "mean" or "max" collapse across
    the batch.
    """
    norms = np.asarray(getattr(trace, "norms", trace), dtype=np.float64)
    if norms.ndim == 1:
        norms = norms[:, None]
    if reduce is None:
        return norms.copy()
    if reduce == "mean":
        return norms.mean(axis=1)
    if reduce == "max":
        return norms.max(axis=1)
    raise ValueError(f"unknown reduction {reduce!r}")


@dataclass
class MetricsReport:
    """All metrics for one (request, format) cell, keyed by cutoff."""

    graph: str
    format_bits: str
    kappa: int
    iterations: int
    request_id: int
    errors: dict = field(default_factory=dict)
    edit_distance: dict = field(default_factory=dict)
    ndcg: dict = field(default_factory=dict)
    precision: dict = field(default_factory=dict)
    mae: float = float("nan")
    kendall_tau: float = float("nan")

    def rows(self) -> list[dict]:
        out = []
        for n in sorted(self.errors):
            out.append(
                {
                    "graph": self.graph,
                    "format_bits": self.format_bits,
                    "kappa": self.kappa,
                    "iterations": self.iterations,
                    "request_id": self.request_id,
                    "N": n,
                    "errors": self.errors[n],
                    "edit_distance": self.edit_distance[n],
                    "ndcg": self.ndcg[n],
                    "precision": self.precision[n],
                    "mae": self.mae,
                    "kendall_tau": self.kendall_tau,
                }
            )
        return out


def build_report(
    pair: RankingPair,
    cutoffs,
    *,
    graph: str,
    format_bits: str,
    kappa: int,
    iterations: int,
    request_id: int,
) -> MetricsReport:
    """Evaluate every cutoff metric plus the whole-vector ones."""
    rep = MetricsReport(
        graph=graph,
        format_bits=format_bits,
        kappa=kappa,
        iterations=iterations,
        request_id=request_id,
    )
    for n in cutoffs:
        rep.errors[n] = errors_at(pair, n)
        rep.edit_distance[n] = edit_distance_at(pair, n)
        rep.ndcg[n] = ndcg(pair, n)
        rep.precision[n] = precision_at(pair, n)
    rep.mae = mae(pair)
    rep.kendall_tau = kendall_tau(pair)
    return rep
