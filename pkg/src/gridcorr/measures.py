"""Pairwise similarity measures for hourly price panels.

Five families are provided:

* plain Pearson correlation,
* exponentially weighted Pearson correlation (recent hours count more),
* event synchronization of median-thresholded spike trains, in both the
  classic event-count form and the signed, normalized matrix form,
* an n-gram string kernel over node identifiers, used as a location proxy.

Every matrix-valued operation returns a :class:`CorrelationMatrix`, which
validates symmetry at construction and records the parameters used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from ._validation import check_symmetric, clip_correlations
from .exceptions import MeasureError
from .panel import NodeName, PricePanel

MEASURES = (
    "pearson",
    "smoothed_pearson",
    "event_sync",
    "event_sync_original",
    "rmt_filtered",
    "sparse",
    "string",
)

UNIT_DIAGONAL_MEASURES = ("pearson", "smoothed_pearson", "string")

DEFAULT_THETA = 3.0
DEFAULT_TAU = 3
DEFAULT_STRING_P = 3


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Symmetric N x N similarity matrix tagged with the measure that made it."""

    values: np.ndarray
    measure: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise MeasureError(f"unknown measure tag {self.measure!r}")
        values = check_symmetric(self.values, name=f"{self.measure} matrix")
        if self.measure in UNIT_DIAGONAL_MEASURES or (
            self.measure == "event_sync"
            and self.params.get("normalization", "diagonal") == "diagonal"
        ):
            if np.abs(np.diag(values) - 1.0).max() > 1e-8:
                raise MeasureError(f"{self.measure} matrix must have a unit diagonal")
            if values.min() < -1.0 - 1e-9 or values.max() > 1.0 + 1e-9:
                raise MeasureError(f"{self.measure} entries must lie in [-1, 1]")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative, nondecreasing observation weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise MeasureError("weights must be a non-empty 1-d array")
        if (w < 0).any():
            raise MeasureError("weights must be nonnegative")
        if (np.diff(w) < -1e-15).any():
            raise MeasureError("weights must be nondecreasing in time")
        if abs(w.sum() - 1.0) > 1e-12:
            raise MeasureError("weights must sum to 1")
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class TernarySeries:
    """A series reduced to {-1, 0, +1} events via its positive/negative medians."""

    events: np.ndarray
    mp: float
    mn: float

    def __post_init__(self):
        ev = np.asarray(self.events)
        if not np.isin(ev, (-1, 0, 1)).all():
            raise MeasureError("ternary events must be in {-1, 0, +1}")
        ev = ev.astype(np.int8)
        ev.flags.writeable = False
        object.__setattr__(self, "events", ev)

    @property
    def event_times(self) -> np.ndarray:
        return np.flatnonzero(self.events != 0)

    @property
    def n_events(self) -> int:
        return int((self.events != 0).sum())


def _panel_values(panel) -> np.ndarray:
    if isinstance(panel, PricePanel):
        return panel.values
    raise MeasureError("expected a PricePanel")


def _node_label(panel, idx: int) -> str:
    return panel.nodes[idx].raw if isinstance(panel, PricePanel) else str(idx)


def pearson(panel: PricePanel) -> CorrelationMatrix:
    """Pearson correlation matrix with plain temporal averages.

    Raises when any series has zero variance, naming the offending node,
    because the coefficient is undefined there.
    """
    X = _panel_values(panel)
    T = X.shape[1]
    centered = X - X.mean(axis=1, keepdims=True)
    var = (centered ** 2).mean(axis=1)
    bad = np.flatnonzero(var <= 0.0)
    if bad.size:
        raise MeasureError(
            f"correlation undefined for zero-variance node {_node_label(panel, bad[0])!r}"
        )
    cov = centered @ centered.T / T
    C = cov / np.sqrt(np.outer(var, var))
    C, _ = clip_correlations(C)
    np.fill_diagonal(C, 1.0)
    return CorrelationMatrix(C, "pearson")


def exponential_weights(T: int, theta: float) -> WeightVector:
    """Exponentially growing weights ``w_t ~ exp((t - T) / theta)``, t = 1..T.

    Normalization to unit sum fixes the leading constant.  Large ``theta``
    approaches uniform weights, recovering the plain Pearson estimate.
    """
    if theta <= 0:
        raise MeasureError(f"decay factor theta must be positive, got {theta}")
    if T < 1:
        raise MeasureError("need at least one observation")
    t = np.arange(1, T + 1, dtype=float)
    w = np.exp((t - T) / theta)
    return WeightVector(w / w.sum())


def weighted_pearson(panel: PricePanel, weights: WeightVector,
                     params: dict | None = None) -> CorrelationMatrix:
    """Weighted Pearson correlation with weighted means and variances.

    ``rho_ij = s_ij / (s_i s_j)`` where ``s_ij = sum_t w_t (X_it - m_i)(X_jt - m_j)``,
    ``s_k = sqrt(sum_t w_t (X_kt - m_k)^2)`` and ``m_k = sum_t w_t X_kt``.
    """
    X = _panel_values(panel)
    w = weights.weights
    if w.size != X.shape[1]:
        raise MeasureError(f"{w.size} weights for {X.shape[1]} hours")
    means = X @ w
    centered = X - means[:, None]
    cov = (centered * w) @ centered.T
    var = np.einsum("nt,t,nt->n", centered, w, centered)
    bad = np.flatnonzero(var <= 0.0)
    if bad.size:
        raise MeasureError(
            f"weighted variance of node {_node_label(panel, bad[0])!r} is zero"
        )
    C = cov / np.sqrt(np.outer(var, var))
    C, _ = clip_correlations(C)
    np.fill_diagonal(C, 1.0)
    return CorrelationMatrix(C, "smoothed_pearson", params=dict(params or {}))


def smoothed_pearson(panel: PricePanel, theta: float = DEFAULT_THETA) -> CorrelationMatrix:
    """Exponentially smoothed Pearson correlation with decay factor ``theta``."""
    w = exponential_weights(panel.n_hours, theta)
    return weighted_pearson(panel, w, params={"theta": theta})


def ternary_filter(series) -> TernarySeries:
    """Reduce a series to {-1, 0, +1} using the medians of its signed values.

    ``mp`` is the median of the strictly positive samples and ``mn`` the
    median of the strictly negative ones; values above ``mp`` become +1
    events, values below ``mn`` become -1 events, everything between is 0.
    Comparisons are strict, so a series equal to its own median everywhere
    produces no events.  A missing sign class disables that event side.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise MeasureError("ternary filter expects a non-empty 1-d series")
    positives = x[x > 0]
    negatives = x[x < 0]
    mp = float(np.median(positives)) if positives.size else float("inf")
    mn = float(np.median(negatives)) if negatives.size else float("-inf")
    events = np.zeros(x.shape, dtype=np.int8)
    events[x > mp] = 1
    events[x < mn] = -1
    return TernarySeries(events=events, mp=mp, mn=mn)


def event_sync_original(a: TernarySeries, b: TernarySeries, tau: int) -> float:
    """Classic event synchronization count ``Q_tau`` of two event trains.

    Event signs are ignored; a pair of events contributes 1 when separated
    by 0 < dt <= tau and 1/2 when coincident.  The symmetric count is
    normalized by ``sqrt(m_a * m_b)`` with ``m`` the event counts.  Note the
    result is a similarity count, not a correlation: it is unbounded.
    """
    if tau < 0:
        raise MeasureError("tau must be nonnegative")
    ta, tb = a.event_times, b.event_times
    if ta.size == 0 or tb.size == 0:
        raise MeasureError("event synchronization needs at least one event per series")
    dt = np.abs(ta[:, None] - tb[None, :])
    c_ab = np.where(dt == 0, 0.5, (dt <= tau).astype(float)).sum()
    # c(a|b) equals c(b|a) under the absolute-lag convention; keep both terms
    # to mirror the defining sum.
    q = (c_ab + c_ab) / np.sqrt(ta.size * tb.size)
    return float(q)


def _lag_window_sums(E: np.ndarray, tau: int) -> np.ndarray:
    """Per-row sums of entries within +-tau of each position."""
    if tau == 0:
        return E.astype(float)
    T = E.shape[1]
    csum = np.cumsum(E, axis=1, dtype=float)
    hi = np.minimum(np.arange(T) + tau, T - 1)
    lo = np.arange(T) - tau - 1
    upper = csum[:, hi]
    lower = np.where(lo >= 0, csum[:, np.maximum(lo, 0)], 0.0)
    return upper - lower


def event_sync_matrix(panel: PricePanel, tau: int = DEFAULT_TAU,
                      normalization: str = "diagonal",
                      eventless: str = "error") -> CorrelationMatrix:
    """Signed event-synchronization matrix of a panel.

    Each series is ternary filtered; the raw synchronization is
    ``J_ij = sum_t e_i(t) * sum_{|t-t'|<=tau} e_j(t')``, symmetric by
    construction.  ``normalization="diagonal"`` returns
    ``J_ij / sqrt(J_ii J_jj)``, which is bounded by [-1, 1] at tau=0;
    ``"row_sum"`` divides by the row-sum based diagonal matrix instead and
    fails when a row sum is not positive.  Entries outside [-1, 1] (possible
    for tau > 0) are clamped, with the clamp count recorded in ``params``.

    Series with no events either raise or are dropped from the result,
    according to ``eventless``.
    """
    if tau < 0:
        raise MeasureError("tau must be nonnegative")
    if normalization not in ("diagonal", "row_sum"):
        raise MeasureError(f"unknown normalization {normalization!r}")
    if eventless not in ("error", "drop"):
        raise MeasureError(f"eventless must be 'error' or 'drop', got {eventless!r}")
    X = _panel_values(panel)
    E = np.stack([ternary_filter(row).events for row in X])
    active = (E != 0).any(axis=1)
    dropped = np.flatnonzero(~active)
    if dropped.size:
        if eventless == "error":
            raise MeasureError(
                f"node {_node_label(panel, dropped[0])!r} has no events after filtering"
            )
        E = E[active]
        if E.shape[0] < 2:
            raise MeasureError("fewer than 2 series with events remain")
    Ef = E.astype(float)
    J = Ef @ _lag_window_sums(E, tau).T
    J = (J + J.T) / 2.0
    diag = np.diag(J)
    if normalization == "diagonal":
        if (diag <= 0).any():
            idx = int(np.argmax(diag <= 0))
            raise MeasureError(
                f"non-positive self-synchronization for series index {idx}; "
                "use tau=0 or drop the series"
            )
        C = J / np.sqrt(np.outer(diag, diag))
        np.fill_diagonal(C, 1.0)
    else:
        row = J.sum(axis=1)
        if (row <= 0).any():
            idx = int(np.argmax(row <= 0))
            raise MeasureError(f"non-positive row-sum normalizer for series index {idx}")
        C = J / np.sqrt(np.outer(row, row))
    C, clamped = clip_correlations(C)
    params = {
        "tau": int(tau),
        "normalization": normalization,
        "clamped": int(clamped),
    }
    if dropped.size:
        params["dropped"] = [int(i) for i in dropped]
    return CorrelationMatrix(C, "event_sync", params=params)


def _gram_counts(text: str, p: int) -> dict:
    # Whole string acts as its only gram when shorter than p.
    if len(text) < p:
        return {text: 1}
    counts: dict = {}
    for i in range(len(text) - p + 1):
        g = text[i:i + p]
        counts[g] = counts.get(g, 0) + 1
    return counts


def string_correlation(nodes, p: int = DEFAULT_STRING_P) -> CorrelationMatrix:
    """Normalized p-spectrum kernel between raw node identifier strings.

    Similarity is the inner product of contiguous p-gram count vectors,
    normalized so identical strings score 1; strings sharing no gram score 0.
    """
    if p < 1:
        raise MeasureError("gram length p must be >= 1")
    names = [nd.raw if isinstance(nd, NodeName) else str(nd) for nd in nodes]
    if any(name == "" for name in names):
        raise MeasureError("node names must be non-empty")
    if len(names) < 2:
        raise MeasureError("need at least 2 names")
    vocab: dict = {}
    rows, cols, data = [], [], []
    for i, name in enumerate(names):
        for gram, count in _gram_counts(name, p).items():
            j = vocab.setdefault(gram, len(vocab))
            rows.append(i)
            cols.append(j)
            data.append(count)
    G = scipy.sparse.csr_matrix(
        (data, (rows, cols)), shape=(len(names), len(vocab)), dtype=float
    )
    K = (G @ G.T).toarray()
    norms = np.sqrt(np.diag(K))
    C = K / np.outer(norms, norms)
    C, _ = clip_correlations(C)
    C = np.maximum(C, 0.0)
    np.fill_diagonal(C, 1.0)
    return CorrelationMatrix(C, "string", params={"p": int(p)})
