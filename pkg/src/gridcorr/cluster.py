"""Partitioning of correlation structure.

Spectral clustering operates on the median-thresholded similarity graph
through the symmetric normalized Laplacian; community detection runs greedy
multi-level modularity maximization on filtered graphs.  A location proxy
partition comes from clustering the string kernel of node identifiers, with
the cluster count floored at the number of distinct name codes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_seed
from .exceptions import ClusterError
from .graphs import FilteredGraph, threshold_graph
from .measures import (
    DEFAULT_STRING_P,
    CorrelationMatrix,
    string_correlation,
)
from .metrics import adjusted_rand_index, contingency
from .panel import NodeName, parse_node_name

DEFAULT_N_CLUSTERS = 200

KMEANS_RESTARTS = 50

MODULARITY_CONVENTIONS = ("1/2m", "1/m")

_DEGREE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of N nodes to contiguous 0-based cluster labels."""

    labels: np.ndarray
    k: int
    method: str = ""
    seed: int = 0

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise ClusterError("labels must be a non-empty 1-d array")
        present = np.unique(labels)
        if present[0] < 0 or present[-1] >= self.k or present.size != self.k:
            raise ClusterError(
                f"labels must use every id in [0, {self.k}) with no empty cluster"
            )
        labels = labels.copy()
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, labels, method: str = "", seed: int = 0) -> "Partition":
        """Build a partition, compacting labels to contiguous 0-based ids."""
        labels = np.asarray(labels)
        _, compact = np.unique(labels, return_inverse=True)
        return cls(labels=compact, k=int(compact.max()) + 1, method=method, seed=seed)

    @property
    def n(self) -> int:
        return self.labels.size

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def _kmeans_pp_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = ((X - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(n, p=closest / total)
        else:
            idx = rng.integers(n)
        centers[j] = X[idx]
        np.minimum(closest, ((X - centers[j]) ** 2).sum(axis=1), out=closest)
    return centers


def _squared_distances(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        (X ** 2).sum(axis=1)[:, None]
        + (centers ** 2).sum(axis=1)[None, :]
        - 2.0 * X @ centers.T
    )
    return np.maximum(d2, 0.0)


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    n, k = X.shape[0], centers.shape[0]
    labels = None
    for _ in range(max_iter):
        d2 = _squared_distances(X, centers)
        new_labels = d2.argmin(axis=1)
        # Re-seed empty clusters from the farthest point, unless every
        # distance is zero (degenerate identical inputs).
        assigned_d2 = d2[np.arange(n), new_labels]
        for c in range(k):
            if (new_labels == c).any():
                continue
            far = int(assigned_d2.argmax())
            if assigned_d2[far] <= 0.0:
                continue
            centers[c] = X[far]
            new_labels[far] = c
            assigned_d2[far] = 0.0
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
    d2 = _squared_distances(X, centers)
    inertia = float(d2[np.arange(n), d2.argmin(axis=1)].sum())
    return d2.argmin(axis=1), inertia


def _kmeans(X: np.ndarray, k: int, rng: np.random.Generator,
            n_init: int = KMEANS_RESTARTS) -> np.ndarray:
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        centers = _kmeans_pp_init(X, k, rng)
        labels, inertia = _lloyd(X, centers.copy())
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def spectral_clustering(C, k: int, seed: int = 0) -> Partition:
    """Spectral partition of a similarity matrix into ``k`` clusters.

    The similarity is median-thresholded (negative weights truncated at 0),
    embedded through the k smallest eigenvectors of the symmetric normalized
    Laplacian, row-normalized, and clustered by seeded k-means++ with
    ``KMEANS_RESTARTS`` restarts keeping the best inertia.  Deterministic
    for a fixed seed.  Empty clusters are compacted away, so the returned
    ``k`` counts non-empty clusters only.
    """
    seed = check_seed(seed)
    values = C.values if isinstance(C, CorrelationMatrix) else np.asarray(C, dtype=float)
    n = values.shape[0]
    if k < 1:
        raise ClusterError("k must be >= 1")
    if k > n:
        raise ClusterError(f"cannot split {n} nodes into {k} clusters")
    W = threshold_graph(C, quantile=0.5).adjacency()
    off = W[~np.eye(n, dtype=bool)]
    if off.size and off.max() - off.min() <= 1e-15:
        # Constant affinity carries no grouping information; every node is
        # interchangeable, so the only order-equivariant answer is trivial.
        return Partition.from_labels(np.zeros(n, dtype=int), method="spectral",
                                     seed=seed)
    degrees = np.maximum(W.sum(axis=1), _DEGREE_FLOOR)
    inv_sqrt = 1.0 / np.sqrt(degrees)
    L = np.eye(n) - (inv_sqrt[:, None] * W) * inv_sqrt[None, :]
    L = (L + L.T) / 2.0
    _, vecs = np.linalg.eigh(L)
    V = vecs[:, :k]
    norms = np.maximum(np.linalg.norm(V, axis=1), _DEGREE_FLOOR)
    V = V / norms[:, None]
    rng = np.random.default_rng(seed)
    labels = _kmeans(V, k, rng)
    return Partition.from_labels(labels, method="spectral", seed=seed)


def modularity(graph: FilteredGraph, partition: Partition,
               convention: str = "1/2m") -> float:
    """Partition quality against the degree-preserving random baseline.

    The ``"1/2m"`` prefactor convention keeps Q in [-1, 1]; ``"1/m"`` is
    exactly twice as large.  Both share the same optimum, since they
    differ by a positive scale.
    """
    if convention not in MODULARITY_CONVENTIONS:
        raise ClusterError(f"unknown modularity convention {convention!r}")
    if any(w < 0 for _, _, w in graph.edges):
        raise ClusterError("modularity needs nonnegative weights")
    labels = partition.labels
    if labels.size != graph.n_vertices:
        raise ClusterError("partition does not cover the graph's vertices")
    W = graph.adjacency()
    two_m = W.sum()
    if two_m <= 0:
        raise ClusterError("total edge weight must be positive")
    strengths = W.sum(axis=1)
    q = 0.0
    for c in range(partition.k):
        members = labels == c
        q += W[np.ix_(members, members)].sum() - strengths[members].sum() ** 2 / two_m
    q /= two_m
    if convention == "1/m":
        q *= 2.0
    return float(q)


def _one_level(adj: list, loops: np.ndarray, rng: np.random.Generator):
    """One sweep of local moves; returns compacted communities and a moved flag."""
    n = len(adj)
    strengths = np.array([sum(d.values()) for d in adj]) + loops
    two_m = strengths.sum()
    comm = np.arange(n)
    sigma_tot = strengths.copy().astype(float)
    improved = False
    moved = True
    while moved:
        moved = False
        for u in rng.permutation(n):
            cu = comm[u]
            links: dict = {}
            for v, w in adj[u].items():
                if v != u:
                    links[comm[v]] = links.get(comm[v], 0.0) + w
            sigma_tot[cu] -= strengths[u]
            best_c = cu
            best_gain = links.get(cu, 0.0) - strengths[u] * sigma_tot[cu] / two_m
            for c in sorted(links):
                if c == cu:
                    continue
                gain = links[c] - strengths[u] * sigma_tot[c] / two_m
                if gain > best_gain + 1e-12:
                    best_c, best_gain = c, gain
            sigma_tot[best_c] += strengths[u]
            if best_c != cu:
                comm[u] = best_c
                moved = True
                improved = True
    _, compact = np.unique(comm, return_inverse=True)
    return compact, improved


def louvain(graph: FilteredGraph, seed: int = 0) -> Partition:
    """Greedy multi-level modularity maximization on a weighted graph.

    Node visit order is shuffled by the seed; a local move is accepted only
    for a strictly positive modularity gain; levels repeat until a sweep
    yields no improvement.  Deterministic for a fixed seed, and never worse
    than the all-singletons partition since that is the starting point.
    """
    seed = check_seed(seed)
    if not graph.edges:
        raise ClusterError("community detection needs at least one edge")
    if any(w < 0 for _, _, w in graph.edges):
        raise ClusterError("community detection needs nonnegative weights")
    n = graph.n_vertices
    rng = np.random.default_rng(seed)
    adj: list = [dict() for _ in range(n)]
    for i, j, w in graph.edges:
        if w == 0.0:
            continue
        adj[i][j] = adj[i].get(j, 0.0) + w
        adj[j][i] = adj[j].get(i, 0.0) + w
    loops = np.zeros(n)
    node_to_comm = np.arange(n)
    while True:
        comm, improved = _one_level(adj, loops, rng)
        if not improved:
            break
        node_to_comm = comm[node_to_comm]
        nc = int(comm.max()) + 1
        new_adj: list = [dict() for _ in range(nc)]
        new_loops = np.zeros(nc)
        for u in range(len(adj)):
            cu = int(comm[u])
            new_loops[cu] += loops[u]
            for v, w in adj[u].items():
                cv = int(comm[v])
                if cv == cu:
                    new_loops[cu] += w  # both endpoints contribute, doubling the edge
                else:
                    new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
        adj, loops = new_adj, new_loops
        if nc == 1:
            break
    return Partition.from_labels(node_to_comm, method="louvain", seed=seed)


def ns_mapping(n: int, n_codes: int) -> int:
    """Cluster count for the location proxy: ``max(n, n_codes)``.

    Requesting fewer clusters than there are distinct name codes falls back
    to the code count; beyond that the requested count is used directly.
    """
    if n < 1 or n_codes < 1:
        raise ClusterError("cluster counts must be >= 1")
    return max(int(n), int(n_codes))


def distinct_code_count(nodes) -> int:
    names = [nd if isinstance(nd, NodeName) else parse_node_name(str(nd)) for nd in nodes]
    return len({nd.code for nd in names})


def location_proxy(nodes, n: int, p: int = DEFAULT_STRING_P, seed: int = 0,
                   n_codes: int | None = None) -> Partition:
    """Reference partition from the string kernel of node identifiers.

    Spectral clustering of the p-gram similarity with the cluster count
    ``ns_mapping(n, n_codes)``; by default ``n_codes`` is the number of
    distinct parsed name codes.
    """
    if n_codes is None:
        n_codes = distinct_code_count(nodes)
    C = string_correlation(nodes, p=p)
    part = spectral_clustering(C, ns_mapping(n, n_codes), seed=seed)
    return Partition(labels=part.labels, k=part.k, method="location_proxy", seed=seed)


def misclassified_vs_reference(partition: Partition, reference: Partition) -> np.ndarray:
    """Boolean flag per node: not in its cluster's majority reference class.

    Each cluster of ``partition`` maps to the reference cluster it overlaps
    most (ties to the smaller reference id); nodes outside that majority
    class are flagged.
    """
    table = contingency(partition, reference).counts
    majority = table.argmax(axis=1)
    _, ref_ids = np.unique(reference.labels, return_inverse=True)
    _, part_ids = np.unique(partition.labels, return_inverse=True)
    return ref_ids != majority[part_ids]


@dataclass(frozen=True)
class TuningCurve:
    """Location-proxy agreement and size disparity over a cluster-count sweep."""

    measure: str
    n_values: tuple
    ari: tuple
    disparity: tuple


def tune_clusters(panel, measures, n_range, seed: int = 0,
                  p: int = DEFAULT_STRING_P, **measure_params) -> list:
    """Sweep the cluster count for each measure.

    For every n in ``n_range`` the spectral partition of each measure is
    compared to the location proxy at the same n (ARI) and its size
    disparity recorded (NaN when fewer than 2 clusters survive).
    """
    from .metrics import disparity as size_disparity
    from .pipeline import MeasureParams, compute_measure

    params = MeasureParams(**measure_params) if measure_params else MeasureParams()
    n_values = [int(n) for n in n_range]
    if any(n < 1 or n > panel.n_nodes for n in n_values):
        raise ClusterError("n_range must stay within [1, N]")
    n_codes = distinct_code_count(panel.nodes)
    proxies: dict = {}
    curves = []
    for measure in measures:
        C = compute_measure(panel, measure, params)
        aris, disparities = [], []
        for n in n_values:
            ns = ns_mapping(n, n_codes)
            if ns not in proxies:
                proxies[ns] = location_proxy(panel.nodes, n, p=p, seed=seed,
                                             n_codes=n_codes)
            part = spectral_clustering(C, n, seed=seed)
            aris.append(adjusted_rand_index(part, proxies[ns]))
            try:
                disparities.append(size_disparity(part))
            except Exception:
                disparities.append(float("nan"))
        curves.append(TuningCurve(measure=measure, n_values=tuple(n_values),
                                  ari=tuple(aris), disparity=tuple(disparities)))
    return curves
