"""Directed weighted graphs stored in compressed sparse row form.

Node ids are dense integers ``0 .. node_count - 1``.  A :class:`Graph` is
immutable once built; weight-assignment helpers return new graphs.
"""

from __future__ import annotations

import logging
import os
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)


class GraphFormatError(ValueError):
    """Raised when an edge-list file cannot be parsed or validated."""


class Graph:
    """Directed multigraph with per-edge weights in [0, 1].

    Out-edges of ``u`` are ``indices[indptr[u]:indptr[u + 1]]`` with weights
    at the same positions.  Parallel edges are kept.
    """

    def __init__(self, node_count: int, indptr: np.ndarray, indices: np.ndarray,
                 weights: np.ndarray, self_loops_dropped: int = 0):
        indptr = np.asarray(indptr, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        if indptr.shape != (node_count + 1,):
            raise ValueError("indptr must have node_count + 1 entries")
        if indices.shape != weights.shape or indices.shape[0] != indptr[-1]:
            raise ValueError("indices/weights length must equal indptr[-1]")
        if indices.size and (indices.min() < 0 or indices.max() >= node_count):
            raise ValueError("edge target out of range")
        if weights.size and (weights.min() < 0.0 or weights.max() > 1.0):
            raise ValueError("edge weights must lie in [0, 1]")
        for arr in (indptr, indices, weights):
            arr.setflags(write=False)
        self.node_count = int(node_count)
        self.indptr = indptr
        self.indices = indices
        self.weights = weights
        self.self_loops_dropped = self_loops_dropped

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Sequence], *,
                   drop_self_loops: bool = True) -> "Graph":
        """Build a graph from ``(src, dst)`` or ``(src, dst, weight)`` tuples.

        Edge order within each source is preserved.
        """
        src, dst, w = [], [], []
        dropped = 0
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if drop_self_loops and u == v:
                dropped += 1
                continue
            src.append(u)
            dst.append(v)
            w.append(float(e[2]) if len(e) > 2 else 0.0)
        src_a = np.asarray(src, dtype=np.int64)
        if src_a.size and (src_a.min() < 0 or src_a.max() >= node_count):
            raise ValueError("edge source out of range")
        order = np.argsort(src_a, kind="stable")
        counts = np.bincount(src_a, minlength=node_count)
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(node_count, indptr, np.asarray(dst, dtype=np.int64)[order],
                   np.asarray(w, dtype=np.float64)[order], self_loops_dropped=dropped)

    @property
    def edge_count(self) -> int:
        return int(self.indices.shape[0])

    def out_edges(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.node_count)

    @cached_property
    def sources(self) -> np.ndarray:
        """Source node of every edge, aligned with ``indices``."""
        return np.repeat(np.arange(self.node_count), self.out_degree)

    @cached_property
    def in_weight_sums(self) -> np.ndarray:
        return np.bincount(self.indices, weights=self.weights, minlength=self.node_count)

    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(u), int(v), float(w))
                for u, v, w in zip(self.sources, self.indices, self.weights)]

    def with_weights(self, weights: np.ndarray) -> "Graph":
        return Graph(self.node_count, self.indptr, self.indices, weights,
                     self_loops_dropped=self.self_loops_dropped)

    def reversed(self) -> "Graph":
        return Graph.from_edges(self.node_count,
                                zip(self.indices.tolist(), self.sources.tolist(),
                                    self.weights.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.node_count == other.node_count
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.weights, other.weights))

    def __repr__(self) -> str:
        return f"Graph(nodes={self.node_count}, edges={self.edge_count})"


def load_edge_list(path: str | os.PathLike, *, undirected: bool = False) -> Graph:
    """Read a whitespace-separated ``src dst [weight]`` edge list.

    Lines starting with ``#`` are comments, except ``# nodes <n>`` which
    declares a minimum node count (written by :func:`save_edge_list` so
    isolated trailing nodes survive a round trip).  Self-loops are dropped
    and counted in ``Graph.self_loops_dropped``.
    """
    edges = []
    declared = 0
    max_id = -1
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "nodes" and parts[1].isdigit():
                    declared = int(parts[1])
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(f"{path}:{lineno}: expected 'src dst [weight]'")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 0.0
            except ValueError:
                raise GraphFormatError(f"{path}:{lineno}: cannot parse {line!r}") from None
            if u < 0 or v < 0:
                raise GraphFormatError(f"{path}:{lineno}: negative node id")
            if not 0.0 <= w <= 1.0:
                raise GraphFormatError(f"{path}:{lineno}: weight {w} outside [0, 1]")
            edges.append((u, v, w))
            if undirected:
                edges.append((v, u, w))
            max_id = max(max_id, u, v)
    g = Graph.from_edges(max(declared, max_id + 1), edges)
    if g.self_loops_dropped:
        log.warning("%s: dropped %d self-loops", path, g.self_loops_dropped)
    return g


def save_edge_list(g: Graph, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(f"# nodes {g.node_count}\n")
        for u, v, w in g.edges():
            fh.write(f"{u} {v} {w!r}\n")


def assign_wc_weights(g: Graph) -> Graph:
    """Weighted Cascade: edge (u, v) gets weight 1 / in_degree(v)."""
    indeg = g.in_degree[g.indices]
    return g.with_weights(1.0 / indeg) if g.edge_count else g


def assign_tv_weights(g: Graph, rng: np.random.Generator) -> Graph:
    """Tri-valency: each edge weight drawn uniformly from {0.1, 0.01, 0.001}."""
    values = np.array([0.1, 0.01, 0.001])
    return g.with_weights(values[rng.integers(0, 3, size=g.edge_count)])
