"""Dispatch from measure and method names to the underlying operations.

Shared by cluster tuning, the rolling-window dynamics, and the CLI so the
same names mean the same computations everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cluster import DEFAULT_N_CLUSTERS, Partition, louvain, spectral_clustering
from .exceptions import GridcorrError
from .graphs import mst_from_correlation, with_correlation_weights
from .measures import (
    DEFAULT_TAU,
    DEFAULT_THETA,
    CorrelationMatrix,
    event_sync_matrix,
    pearson,
    smoothed_pearson,
    string_correlation,
)
from .rmt import rmt_split
from .sparse import DEFAULT_RHO, SparseConfig, sparse_correlation

PANEL_MEASURES = ("pearson", "smoothed_pearson", "event_sync", "rmt_filtered", "sparse")

METHODS = ("spectral", "mst_louvain")


@dataclass(frozen=True)
class MeasureParams:
    theta: float = DEFAULT_THETA
    tau: int = DEFAULT_TAU
    rho: float = DEFAULT_RHO
    string_p: int = 3
    normalization: str = "diagonal"


def compute_measure(panel, measure: str, params: MeasureParams | None = None) -> CorrelationMatrix:
    """Correlation matrix of a panel under the named measure."""
    params = params or MeasureParams()
    if measure == "pearson":
        return pearson(panel)
    if measure == "smoothed_pearson":
        return smoothed_pearson(panel, theta=params.theta)
    if measure == "event_sync":
        return event_sync_matrix(panel, tau=params.tau, normalization=params.normalization)
    if measure == "rmt_filtered":
        return rmt_split(pearson(panel), panel.n_hours).filtered
    if measure == "sparse":
        matrix, _ = sparse_correlation(pearson(panel), SparseConfig(rho=params.rho))
        return matrix
    if measure == "string":
        return string_correlation(panel.nodes, p=params.string_p)
    raise GridcorrError(f"unknown measure {measure!r}")


def compute_partition(C: CorrelationMatrix, method: str,
                      k: int = DEFAULT_N_CLUSTERS, seed: int = 0):
    """Partition a correlation matrix by the named method.

    Returns ``(Partition, FilteredGraph | None)``; the graph is the MST when
    the method builds one, so callers can serialize it.
    """
    if method == "spectral":
        return spectral_clustering(C, k, seed=seed), None
    if method == "mst_louvain":
        tree = mst_from_correlation(C)
        weighted = with_correlation_weights(tree, C)
        part = louvain(weighted, seed=seed)
        part = Partition(labels=part.labels, k=part.k, method="mst_louvain", seed=seed)
        return part, tree
    raise GridcorrError(f"unknown clustering method {method!r}")
