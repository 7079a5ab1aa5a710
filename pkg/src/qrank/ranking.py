"""Score vectors to rankings, and the statistics used to compare rankings:
tie groups, Kendall concordance, per-node rank shifts, degeneracy profiles,
and neighbor score/degree profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO

import numpy as np
from scipy.stats import kendalltau

from .netgraph import DirectedGraph

TIE_EPS = 1e-6
NEGATIVE_SCORE_TOL = 1e-9


@dataclass(frozen=True)
class RankResult:
    """A ranking: per-node scores, descending order, competition positions
    ("1, 2, 2, 4"-style, ties share the first position of their group), and
    the tie groups themselves (each a tuple of node indices)."""

    scores: np.ndarray
    order: np.ndarray
    positions: np.ndarray
    tie_groups: tuple[tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return len(self.scores)

    def position_of(self, node: int) -> int:
        return int(self.positions[node])


def rank_from_scores(scores, eps_tie: float = TIE_EPS) -> RankResult:
    """Build a ranking from a nonnegative score vector.

    Nodes are sorted by descending score (ties broken by index for
    determinism). Consecutive sorted nodes whose scores differ by less
    than ``eps_tie`` are chained into one tie group; all members share the
    competition position of the group's first member.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or scores.size == 0:
        raise ValueError("scores must be a non-empty 1-D vector")
    if scores.min() < -NEGATIVE_SCORE_TOL:
        raise ValueError(f"negative score {scores.min()} beyond tolerance")

    order = np.argsort(-scores, kind="stable")
    positions = np.zeros(len(scores), dtype=int)
    groups: list[tuple[int, ...]] = []
    group: list[int] = [int(order[0])]
    group_start = 0
    for idx in range(1, len(order)):
        node = int(order[idx])
        prev = int(order[idx - 1])
        if scores[prev] - scores[node] < eps_tie:
            group.append(node)
        else:
            for member in group:
                positions[member] = group_start + 1
            groups.append(tuple(group))
            group = [node]
            group_start = idx
    for member in group:
        positions[member] = group_start + 1
    groups.append(tuple(group))

    return RankResult(
        scores=scores.copy(),
        order=order,
        positions=positions,
        tie_groups=tuple(groups),
    )


def kendall_concordance(a: RankResult, b: RankResult) -> float:
    """Tie-aware concordance between two rankings, mapped to [0, 1].

    Kendall tau-b over the two position vectors, rescaled as (tau + 1)/2 so
    identical rankings give 1 and an exact reversal (without ties) gives 0.
    When a position vector is constant tau-b is undefined; we return 1 for
    identical vectors and 0.5 (the tau=0 image, no information) otherwise.
    """
    if a.n != b.n:
        raise ValueError("rankings cover different node sets")
    if np.array_equal(a.positions, b.positions):
        return 1.0
    if len(set(a.positions.tolist())) == 1 or len(set(b.positions.tolist())) == 1:
        return 0.5
    tau = kendalltau(a.positions, b.positions, variant="b").statistic
    return float((tau + 1.0) / 2.0)


def rank_shift(a: RankResult, b: RankResult) -> np.ndarray:
    """Per-node position difference position_b - position_a.

    Positive means the node sits higher (better, smaller position number)
    under ranking ``a`` than under ``b``.
    """
    if a.n != b.n:
        raise ValueError("rankings cover different node sets")
    return b.positions - a.positions


def degeneracy_profile(r: RankResult) -> dict[int, int]:
    """Occupied position -> number of nodes sharing it. The profile length
    equals the number of tie groups; counts sum to n."""
    profile: dict[int, int] = {}
    for group in r.tie_groups:
        profile[int(r.positions[group[0]])] = len(group)
    return dict(sorted(profile.items()))


def neighbor_profile(
    g: DirectedGraph, r: RankResult, neighbors: str = "out"
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean neighbor score, mean neighbor total degree, and their ratio.

    ``neighbors`` selects the neighborhood: "out" (targets of out-edges,
    the default), "in", or "total" (union of both). Nodes without
    neighbors get NaN in all three outputs.
    """
    if g.n != r.n:
        raise ValueError("graph and ranking cover different node sets")
    if neighbors not in ("out", "in", "total"):
        raise ValueError(f"unknown neighborhood {neighbors!r}")

    adjacency: list[set[int]] = [set() for _ in range(g.n)]
    for u, v in g.edges:
        if neighbors in ("out", "total"):
            adjacency[u].add(v)
        if neighbors in ("in", "total"):
            adjacency[v].add(u)

    degrees = g.total_degrees()
    nn_score = np.full(g.n, np.nan)
    nn_degree = np.full(g.n, np.nan)
    for i, nbrs in enumerate(adjacency):
        if not nbrs:
            continue
        idx = list(nbrs)
        nn_score[i] = r.scores[idx].mean()
        nn_degree[i] = degrees[idx].mean()
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = nn_score / nn_degree
    return nn_score, nn_degree, ratio


def ranking_to_csv(r: RankResult, dest: IO[str], labels=None):
    """Write "label,score,position,tie_group" rows in descending order."""
    group_of = {}
    for gid, group in enumerate(r.tie_groups):
        for node in group:
            group_of[node] = gid
    dest.write("node,score,position,tie_group\n")
    for node in r.order:
        node = int(node)
        name = labels[node] if labels is not None else str(node)
        dest.write(
            f"{name},{format(r.scores[node], '.12g')},{r.positions[node]},{group_of[node]}\n"
        )
