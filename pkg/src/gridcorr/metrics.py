"""Partition comparison and size-heterogeneity metrics.

Rand and adjusted Rand indices are computed from the contingency table in
exact integer arithmetic, so results do not drift for panels with thousands
of nodes.  Functions accept either Partition objects or bare label arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import GridcorrError


def _labels(partition) -> np.ndarray:
    labels = getattr(partition, "labels", partition)
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise GridcorrError("labels must be a non-empty 1-d sequence")
    return labels


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Cross-tabulation ``counts[i][j] = |Y_i intersect Y'_j|``."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or (counts < 0).any():
            raise GridcorrError("contingency counts must be a nonnegative 2-d table")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def contingency(Y, Yp) -> ContingencyTable:
    """Contingency table of two partitions of the same objects."""
    a = _labels(Y)
    b = _labels(Yp)
    if a.size != b.size:
        raise GridcorrError(f"partitions cover {a.size} and {b.size} objects")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    counts = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(counts, (ai, bi), 1)
    return ContingencyTable(counts)


def _pair_counts(table: ContingencyTable):
    """(same-same, raw t1, t2) pair counts as exact Python integers."""
    same_both = int(sum(comb(int(m), 2) for m in table.counts.ravel()))
    t1 = int(sum(comb(int(r), 2) for r in table.row_sums))
    t2 = int(sum(comb(int(c), 2) for c in table.col_sums))
    return same_both, t1, t2


def rand_index(Y, Yp) -> float:
    """Fraction of object pairs classified consistently by both partitions.

    ``R = (a + b) / C(N, 2)`` where ``a`` counts pairs together in both
    partitions and ``b`` pairs separated in both.
    """
    table = contingency(Y, Yp)
    n = table.total
    if n < 2:
        raise GridcorrError("rand index needs at least 2 objects")
    a, t1, t2 = _pair_counts(table)
    all_pairs = comb(n, 2)
    b = all_pairs - t1 - t2 + a
    return (a + b) / all_pairs


def _is_identical_up_to_relabeling(table: ContingencyTable) -> bool:
    counts = table.counts
    return (
        counts.shape[0] == counts.shape[1]
        and ((counts > 0).sum(axis=0) == 1).all()
        and ((counts > 0).sum(axis=1) == 1).all()
    )


def adjusted_rand_index(Y, Yp) -> float:
    """Chance-corrected pair agreement under the hypergeometric null.

    Equals 1 for identical partitions (up to relabeling) and is near 0 for
    independent ones.  When the null denominator vanishes (both partitions
    trivial) the value is 1 if the partitions coincide, else 0.
    """
    table = contingency(Y, Yp)
    n = table.total
    if n < 2:
        raise GridcorrError("adjusted rand index needs at least 2 objects")
    raw, t1, t2 = _pair_counts(table)
    pairs2 = n * (n - 1)  # 2 * C(n, 2)
    # Multiply numerator and denominator of (raw - t3) / ((t1+t2)/2 - t3),
    # t3 = 2 t1 t2 / (n (n-1)), by 2 C(n, 2) to stay in integers.
    numer = 2 * raw * (pairs2 // 2) - 2 * t1 * t2
    denom = (t1 + t2) * (pairs2 // 2) - 2 * t1 * t2
    if denom == 0:
        return 1.0 if _is_identical_up_to_relabeling(table) else 0.0
    return numer / denom


def disparity(partition) -> float:
    """Coefficient of variation of cluster sizes.

    Zero means all clusters share one size; large values flag a few huge
    clusters next to many small ones.  Needs at least 2 clusters because
    the size dispersion uses the sample (1/(k-1)) normalizer.
    """
    labels = _labels(partition)
    _, counts = np.unique(labels, return_counts=True)
    if counts.size < 2:
        raise GridcorrError("disparity needs at least 2 clusters")
    counts = counts.astype(float)
    return float(counts.std(ddof=1) / counts.mean())
