"""Scikit-learn compatible estimators wrapping the functional core.

Correlation estimators are stateless transformers: given samples arranged
as an (n_hours, n_nodes) array they produce the (n_nodes, n_nodes)
similarity matrix, so they chain naturally with the clusterers in a
Pipeline.  ``fit`` validates and caches the matrix as ``correlation_`` for
inspection; ``transform`` recomputes on whatever panel it is given.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin

from ._validation import as_float_matrix
from .cluster import DEFAULT_N_CLUSTERS, louvain, spectral_clustering
from .graphs import mst_from_correlation, with_correlation_weights
from .measures import (
    DEFAULT_STRING_P,
    DEFAULT_TAU,
    DEFAULT_THETA,
    CorrelationMatrix,
    event_sync_matrix,
    pearson,
    smoothed_pearson,
    string_correlation,
)
from .panel import PricePanel
from .rmt import rmt_split
from .sparse import DEFAULT_RHO, SparseConfig, sparse_correlation


def _to_panel(X) -> PricePanel:
    X = as_float_matrix(X, "X")
    # Samples arrive (n_hours, n_nodes); panels store series per row.
    return PricePanel.from_values(X.T)


class _CorrelationTransformer(BaseEstimator, TransformerMixin):
    """Shared fit/transform plumbing for panel-based correlation measures."""

    def _compute(self, X) -> CorrelationMatrix:
        raise NotImplementedError

    def fit(self, X, y=None):
        matrix = self._compute(X)
        self.correlation_ = matrix.values
        self.measure_params_ = dict(matrix.params)
        self.n_features_in_ = matrix.values.shape[0]
        return self

    def transform(self, X):
        return self._compute(X).values

    def fit_transform(self, X, y=None):
        self.fit(X)
        return self.correlation_


class PearsonCorrelation(_CorrelationTransformer):
    """Plain Pearson correlation of an (n_hours, n_nodes) sample matrix."""

    def _compute(self, X):
        return pearson(_to_panel(X))


class SmoothedPearsonCorrelation(_CorrelationTransformer):
    """Exponentially weighted Pearson correlation; recent hours weigh more."""

    def __init__(self, theta: float = DEFAULT_THETA):
        self.theta = theta

    def _compute(self, X):
        return smoothed_pearson(_to_panel(X), theta=self.theta)


class EventSynchronizationCorrelation(_CorrelationTransformer):
    """Signed event synchronization of median-thresholded spike trains."""

    def __init__(self, tau: int = DEFAULT_TAU, normalization: str = "diagonal"):
        self.tau = tau
        self.normalization = normalization

    def _compute(self, X):
        return event_sync_matrix(_to_panel(X), tau=self.tau,
                                 normalization=self.normalization)


class RMTFilteredCorrelation(_CorrelationTransformer):
    """Group component of the random-matrix split of the Pearson matrix.

    After ``fit`` the split diagnostics are available as
    ``market_eigenvalue_`` and ``n_group_modes_``.
    """

    def _split(self, X):
        panel = _to_panel(X)
        return rmt_split(pearson(panel), panel.n_hours)

    def _compute(self, X):
        return self._split(X).filtered

    def fit(self, X, y=None):
        split = self._split(X)
        matrix = split.filtered
        self.correlation_ = matrix.values
        self.measure_params_ = dict(matrix.params)
        self.market_eigenvalue_ = split.market_eigenvalue
        self.n_group_modes_ = split.n_group_modes
        self.n_features_in_ = matrix.values.shape[0]
        return self


class SparseCorrelation(_CorrelationTransformer):
    """L1-penalized nearest-correlation estimate of the Pearson matrix."""

    def __init__(self, rho: float = DEFAULT_RHO, tol: float = 1e-8,
                 max_iter: int = 500, eps_pd: float = 1e-8):
        self.rho = rho
        self.tol = tol
        self.max_iter = max_iter
        self.eps_pd = eps_pd

    def _config(self) -> SparseConfig:
        return SparseConfig(rho=self.rho, tol=self.tol, max_iter=self.max_iter,
                            eps_pd=self.eps_pd)

    def _compute(self, X):
        matrix, _ = sparse_correlation(pearson(_to_panel(X)), self._config())
        return matrix

    def fit(self, X, y=None):
        matrix, report = sparse_correlation(pearson(_to_panel(X)), self._config())
        self.correlation_ = matrix.values
        self.measure_params_ = dict(matrix.params)
        self.report_ = report
        self.n_features_in_ = matrix.values.shape[0]
        return self


class StringKernelCorrelation(BaseEstimator, TransformerMixin):
    """Normalized p-gram similarity between identifier strings.

    ``X`` is a sequence of names rather than a numeric sample matrix.
    """

    def __init__(self, p: int = DEFAULT_STRING_P):
        self.p = p

    def fit(self, X, y=None):
        self.correlation_ = string_correlation(list(X), p=self.p).values
        self.n_features_in_ = self.correlation_.shape[0]
        return self

    def transform(self, X):
        return string_correlation(list(X), p=self.p).values

    def fit_transform(self, X, y=None):
        self.fit(X)
        return self.correlation_


class SpectralCorrelationClustering(BaseEstimator, ClusterMixin):
    """Spectral clustering of a precomputed (n_nodes, n_nodes) similarity."""

    def __init__(self, n_clusters: int = DEFAULT_N_CLUSTERS, random_state: int = 0):
        self.n_clusters = n_clusters
        self.random_state = random_state

    def fit(self, X, y=None):
        part = spectral_clustering(as_float_matrix(X, "affinity"),
                                   self.n_clusters, seed=self.random_state)
        self.labels_ = np.asarray(part.labels)
        self.n_clusters_ = part.k
        return self


class MSTLouvainClustering(BaseEstimator, ClusterMixin):
    """Louvain communities of the minimum spanning tree of a similarity matrix."""

    def __init__(self, random_state: int = 0):
        self.random_state = random_state

    def fit(self, X, y=None):
        C = as_float_matrix(X, "affinity")
        tree = mst_from_correlation(C)
        part = louvain(with_correlation_weights(tree, C), seed=self.random_state)
        self.labels_ = np.asarray(part.labels)
        self.n_clusters_ = part.k
        self.tree_ = tree
        return self
