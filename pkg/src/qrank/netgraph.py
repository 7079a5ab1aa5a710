"""Directed graphs, edge-list I/O, synthetic generators, and the classical
transition / Google matrices that drive the dissipative part of the walk.

Matrices here follow the column-stochastic convention: entry (i, j) is the
probability of hopping from origin j to destination i, so column sums are 1
and the stationary distribution solves G p* = p*.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

logger = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-12


class EdgeListParseError(ValueError):
    """Raised for a malformed edge-list line; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class DirectedGraph:
    """Immutable directed graph on nodes 0..n-1.

    Edges are ordered (source, target) pairs with no self-loops and no
    duplicates, kept in insertion order so saving and reloading preserves
    the node indexing. ``labels`` optionally maps indices to the original
    node names from an edge-list file.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph must have at least one node")
        seen = set()
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise ValueError(f"self-loop ({u}, {v}) not allowed")
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        if self.labels is not None and len(self.labels) != self.n:
            raise ValueError("labels length must equal n")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def label_of(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def adjacency_matrix(self) -> np.ndarray:
        """0/1 matrix A with A[u, v] = 1 iff the edge u -> v exists."""
        a = np.zeros((self.n, self.n))
        for u, v in self.edges:
            a[u, v] = 1.0
        return a

    def out_degrees(self) -> np.ndarray:
        k = np.zeros(self.n, dtype=int)
        for u, _ in self.edges:
            k[u] += 1
        return k

    def in_degrees(self) -> np.ndarray:
        k = np.zeros(self.n, dtype=int)
        for _, v in self.edges:
            k[v] += 1
        return k

    def total_degrees(self) -> np.ndarray:
        return self.out_degrees() + self.in_degrees()

    def out_neighbors(self, i: int) -> list[int]:
        return [v for u, v in self.edges if u == i]

    def in_neighbors(self, i: int) -> list[int]:
        return [u for u, v in self.edges if v == i]


@dataclass(frozen=True)
class GraphGenSpec:
    """Recipe for a synthetic graph: Erdos-Renyi ("ER") with a target mean
    degree, or preferential attachment ("BA") with m edges per new node."""

    model: str
    n: int
    param: float
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("ER", "BA"):
            raise ValueError(f"unknown model {self.model!r}, expected 'ER' or 'BA'")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.param < 1:
            raise ValueError("param must be >= 1")
        if self.model == "BA" and int(self.param) >= self.n - 1:
            raise ValueError("BA attachment count m must leave room for growth (m < n-1)")


def load_edge_list(source: IO[str] | str | Path, directed: bool = True) -> DirectedGraph:
    """Parse a whitespace-separated edge list into a DirectedGraph.

    Each non-comment line holds two node tokens. Nodes are indexed densely
    in order of first appearance. With ``directed=False`` every line yields
    both directions. Self-loops and duplicate edges are dropped (counts are
    logged). Lines starting with ``#`` and blank lines are skipped.

    Raises
    ------
    EdgeListParseError
        If a line does not hold exactly two tokens.
    ValueError
        If the stream contains no nodes at all.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_edge_list(fh, directed=directed)

    index: dict[str, int] = {}
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    dropped_self = 0
    dropped_dup = 0

    def node_id(token: str) -> int:
        if token not in index:
            index[token] = len(labels)
            labels.append(token)
        return index[token]

    def add(u: int, v: int):
        nonlocal dropped_self, dropped_dup
        if u == v:
            dropped_self += 1
            return
        if (u, v) in seen:
            dropped_dup += 1
            return
        seen.add((u, v))
        edges.append((u, v))

    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_no, f"expected 2 node tokens, got {len(tokens)}")
        u, v = node_id(tokens[0]), node_id(tokens[1])
        add(u, v)
        if not directed:
            add(v, u)

    if not labels:
        raise ValueError("edge list is empty: no nodes found")
    if dropped_self or dropped_dup:
        logger.info(
            "edge list: dropped %d self-loop(s) and %d duplicate edge(s)",
            dropped_self, dropped_dup,
        )
    return DirectedGraph(n=len(labels), edges=tuple(edges), labels=tuple(labels))


def save_edge_list(g: DirectedGraph, dest: IO[str] | str | Path):
    """Write the graph in the same "u v" format accepted by load_edge_list.

    Edges are written in stored order, so reloading a graph produced by
    load_edge_list reproduces the exact same indexing. Nodes without any
    incident edge cannot be represented in this format.
    """
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            save_edge_list(g, fh)
            return
    for u, v in g.edges:
        dest.write(f"{g.label_of(u)} {g.label_of(v)}\n")


def generate(spec: GraphGenSpec) -> DirectedGraph:
    """Generate a synthetic graph, deterministically for a fixed seed.

    ER: every unordered pair is linked independently with probability
    param/(n-1), giving mean degree ~param; BA: preferential attachment
    with m = param new edges per node, giving a power-law degree tail.
    Both embed the undirected graph bidirectionally (each link becomes two
    opposite directed edges), so the symmetric Hamiltonian and the
    transition matrix derive from the same topology.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.model == "ER":
        pairs = _er_pairs(spec.n, spec.param / (spec.n - 1), rng)
    else:
        pairs = _ba_pairs(spec.n, int(spec.param), rng)
    edges: list[tuple[int, int]] = []
    for u, v in pairs:
        edges.append((u, v))
        edges.append((v, u))
    return DirectedGraph(n=spec.n, edges=tuple(edges))


def _er_pairs(n: int, p: float, rng: np.random.Generator) -> Iterable[tuple[int, int]]:
    draws = rng.random((n, n))
    ii, jj = np.nonzero(np.triu(draws < p, k=1))
    return zip(ii.tolist(), jj.tolist())


def _ba_pairs(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    # Standard preferential attachment via the repeated-endpoints list: the
    # chance of drawing a node is proportional to its current degree.
    pairs: list[tuple[int, int]] = []
    repeated: list[int] = []
    targets = list(range(m))
    for v in range(m, n):
        for t in targets:
            pairs.append((t, v))
        repeated.extend(targets)
        repeated.extend([v] * m)
        picked: set[int] = set()
        while len(picked) < m:
            picked.add(repeated[rng.integers(len(repeated))])
        targets = sorted(picked)
    return pairs


def transition_matrix(g: DirectedGraph) -> np.ndarray:
    """Column-stochastic random-walk matrix of the graph.

    Column j spreads the walker uniformly over the out-neighbors of j.
    A dangling column (out-degree 0) is replaced by the uniform column
    1/(n-1) over all other nodes, mirroring the long-hop matrix.
    """
    n = g.n
    if n < 2:
        raise ValueError("transition matrix requires at least 2 nodes")
    k_out = g.out_degrees()
    pi = np.zeros((n, n))
    for u, v in g.edges:
        pi[v, u] = 1.0 / k_out[u]
    for j in np.nonzero(k_out == 0)[0]:
        pi[:, j] = 1.0 / (n - 1)
        pi[j, j] = 0.0
    return pi


def google_matrix(pi: np.ndarray, q: float = 0.9) -> np.ndarray:
    """Damped matrix G = q*pi + (1-q)*F with uniform long hops F.

    F has 1/(n-1) everywhere off the diagonal and 0 on it, so for q < 1
    every pair of distinct nodes is coupled, which is what guarantees a
    unique stationary distribution on any topology.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must be in [0, 1], got {q}")
    assert_column_stochastic(pi)
    n = pi.shape[0]
    f = np.full((n, n), 1.0 / (n - 1))
    np.fill_diagonal(f, 0.0)
    return q * pi + (1.0 - q) * f


def is_column_stochastic(m: np.ndarray, tol: float = STOCHASTIC_TOL) -> bool:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    if np.any(m < -tol) or np.any(m > 1.0 + tol):
        return False
    return bool(np.all(np.abs(m.sum(axis=0) - 1.0) < tol))


def assert_column_stochastic(m: np.ndarray, tol: float = STOCHASTIC_TOL):
    if not is_column_stochastic(m, tol):
        raise ValueError("matrix is not column-stochastic within tolerance")


def matrix_to_csv(m: np.ndarray, dest: IO[str] | str | Path):
    """Dump a matrix as CSV, one row per destination node."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            matrix_to_csv(m, fh)
            return
    for row in np.atleast_2d(m):
        dest.write(",".join(format(x, ".12g") for x in row) + "\n")
