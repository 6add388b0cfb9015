"""Filtered graphs from correlation matrices: threshold, MST, PMFG.

Correlations convert to distances through ``d = sqrt(2 (1 - c))``, so the
minimum spanning tree of the distances keeps exactly the strongest
correlations.  The planar filter extends the tree to the maximal planar
edge set, 3(N - 2) edges, by greedy insertion in descending correlation
order.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from ._validation import check_symmetric, clip_correlations
from .exceptions import GraphError
from .measures import CorrelationMatrix

PMFG_VERTEX_CAP = 2000

GRAPH_KINDS = ("threshold", "mst", "pmfg")


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


@dataclass(frozen=True, eq=False)
class FilteredGraph:
    """Weighted sparse graph over panel node indices.

    Edges are canonical ``(i, j, weight)`` triples with ``i < j``.  Trees
    must be spanning and acyclic; planar filters must carry exactly
    ``3 (N - 2)`` edges.  Isolated vertices are legal only for threshold
    graphs.
    """

    n_vertices: int
    edges: tuple
    kind: str
    source_measure: str = ""

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise GraphError(f"unknown graph kind {self.kind!r}")
        if self.n_vertices < 2:
            raise GraphError("graphs need at least 2 vertices")
        canon = []
        seen = set()
        for i, j, w in self.edges:
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise GraphError(f"self-loop at vertex {i}")
            if not 0 <= i < self.n_vertices and 0 <= j < self.n_vertices:
                raise GraphError(f"edge ({i},{j}) out of range")
            if i > j:
                i, j = j, i
            if (i, j) in seen:
                raise GraphError(f"duplicate edge ({i},{j})")
            if not np.isfinite(w):
                raise GraphError(f"non-finite weight on edge ({i},{j})")
            seen.add((i, j))
            canon.append((i, j, w))
        if self.kind == "mst":
            if len(canon) != self.n_vertices - 1:
                raise GraphError(
                    f"a spanning tree on {self.n_vertices} vertices needs "
                    f"{self.n_vertices - 1} edges, got {len(canon)}"
                )
            uf = _UnionFind(self.n_vertices)
            for i, j, _ in canon:
                if not uf.union(i, j):
                    raise GraphError("tree edges contain a cycle")
        if self.kind == "pmfg" and self.n_vertices >= 3:
            expected = 3 * (self.n_vertices - 2)
            if len(canon) != expected:
                raise GraphError(f"planar filter must have {expected} edges, got {len(canon)}")
        object.__setattr__(self, "edges", tuple(canon))

    @property
    def edge_set(self) -> set:
        return {(i, j) for i, j, _ in self.edges}

    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def adjacency(self) -> np.ndarray:
        W = np.zeros((self.n_vertices, self.n_vertices))
        for i, j, w in self.edges:
            W[i, j] = W[j, i] = w
        return W


def _matrix_of(C) -> np.ndarray:
    if isinstance(C, CorrelationMatrix):
        return C.values
    return check_symmetric(C, name="correlation matrix")


def _measure_of(C) -> str:
    return C.measure if isinstance(C, CorrelationMatrix) else ""


def corr_to_distance(C):
    """Distance transform ``d_ij = sqrt(2 (1 - c_ij))`` with zero diagonal.

    Entries are clamped into [-1, 1] first; the number of clamped entries is
    returned alongside the distances, since filtered matrices may stray
    outside the correlation range.
    """
    M = _matrix_of(C)
    M, clamped = clip_correlations(M)
    D = np.sqrt(np.maximum(2.0 * (1.0 - M), 0.0))
    np.fill_diagonal(D, 0.0)
    return D, clamped


def mst(D, source_measure: str = "") -> FilteredGraph:
    """Minimum spanning tree of a distance matrix by Kruskal's algorithm.

    Ties break lexicographically on (i, j), so the result is deterministic.
    """
    D = check_symmetric(D, name="distance matrix")
    n = D.shape[0]
    if n < 2:
        raise GraphError("need at least 2 vertices")
    if (D < 0).any():
        raise GraphError("distances must be nonnegative")
    if np.abs(np.diag(D)).max() > 0:
        raise GraphError("distance matrix must have a zero diagonal")
    order = sorted(
        ((D[i, j], i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda e: (e[0], e[1], e[2]),
    )
    uf = _UnionFind(n)
    edges = []
    for w, i, j in order:
        if uf.union(i, j):
            edges.append((i, j, w))
            if len(edges) == n - 1:
                break
    return FilteredGraph(n_vertices=n, edges=tuple(edges), kind="mst",
                         source_measure=source_measure)


def mst_from_correlation(C) -> FilteredGraph:
    """MST of the standard distance transform of a correlation matrix."""
    D, _ = corr_to_distance(C)
    return mst(D, source_measure=_measure_of(C))


def pmfg(C, max_vertices: int = PMFG_VERTEX_CAP) -> FilteredGraph:
    """Planar maximally filtered graph by greedy descending-weight insertion.

    Candidate edges are visited in descending correlation order (ties by
    lexicographic (i, j)); an edge is kept iff the graph stays planar.  The
    construction stops once 3(N - 2) edges are placed.  Sizes above
    ``max_vertices`` are refused because the repeated planarity tests make
    the construction expensive.
    """
    M = _matrix_of(C)
    n = M.shape[0]
    if n < 3:
        raise GraphError("planar filtering needs at least 3 vertices")
    if n > max_vertices:
        raise GraphError(
            f"{n} vertices exceeds the planar-filter cap of {max_vertices}; "
            "the incremental planarity tests are quadratic in practice"
        )
    order = sorted(
        ((M[i, j], i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda e: (-e[0], e[1], e[2]),
    )
    target = 3 * (n - 2)
    G = nx.Graph()
    G.add_nodes_from(range(n))
    edges = []
    for w, i, j in order:
        G.add_edge(i, j)
        ok, _ = nx.check_planarity(G, counterexample=False)
        if ok:
            edges.append((i, j, float(w)))
            if len(edges) == target:
                break
        else:
            G.remove_edge(i, j)
    return FilteredGraph(n_vertices=n, edges=tuple(edges), kind="pmfg",
                         source_measure=_measure_of(C))


def threshold_graph(C, quantile: float = 0.5) -> FilteredGraph:
    """Keep edges whose correlation reaches the given off-diagonal quantile.

    Edge weights are ``max(c_ij, 0)`` so the graph can feed spectral and
    modularity methods directly; vertices whose every correlation falls
    below the cut are left isolated.
    """
    if not 0.0 <= quantile <= 1.0:
        raise GraphError(f"quantile must be in [0, 1], got {quantile}")
    M = _matrix_of(C)
    n = M.shape[0]
    iu = np.triu_indices(n, k=1)
    cut = float(np.quantile(M[iu], quantile))
    edges = tuple(
        (int(i), int(j), float(max(M[i, j], 0.0)))
        for i, j in zip(*iu)
        if M[i, j] >= cut
    )
    return FilteredGraph(n_vertices=n, edges=edges, kind="threshold",
                         source_measure=_measure_of(C))


def with_correlation_weights(graph: FilteredGraph, C) -> FilteredGraph:
    """Re-weight a filtered graph with ``max(c_ij, 0)`` for modularity input."""
    M = _matrix_of(C)
    if M.shape[0] != graph.n_vertices:
        raise GraphError("correlation matrix size does not match the graph")
    edges = tuple((i, j, float(max(M[i, j], 0.0))) for i, j, _ in graph.edges)
    return FilteredGraph(n_vertices=graph.n_vertices, edges=edges,
                         kind=graph.kind, source_measure=_measure_of(C) or graph.source_measure)
