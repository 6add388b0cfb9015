"""Random-matrix denoising of correlation matrices.

Eigenvalues of a pure-noise correlation matrix concentrate inside the
Marchenko-Pastur support; anything above the upper edge carries structure.
The split below separates the dominant one-signed mode (a common factor
across the whole panel), the remaining above-edge group modes, and the
in-bulk random remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_symmetric
from .exceptions import MeasureError
from .measures import CorrelationMatrix

MARKET_ONE_SIGN_FRACTION = 0.9

_SPLITTABLE = ("pearson", "smoothed_pearson")


@dataclass(frozen=True)
class MPBounds:
    """Support edges of the Marchenko-Pastur law for aspect ratio q = N/T."""

    lambda_minus: float
    lambda_plus: float
    q: float


def mp_bounds(N: int, T: int) -> MPBounds:
    """Bulk edges ``(1 -+ sqrt(q))^2`` with ``q = N/T``."""
    if N < 2 or T < 2:
        raise MeasureError("need N >= 2 and T >= 2")
    q = N / T
    sq = np.sqrt(q)
    return MPBounds(lambda_minus=(1 - sq) ** 2, lambda_plus=(1 + sq) ** 2, q=q)


def mp_density(lam, q: float):
    """Marchenko-Pastur density at ``lam`` for aspect ratio ``q`` in (0, 1].

    ``rho(lam) = sqrt((l+ - lam)(lam - l-)) / (2 pi q lam)`` inside the
    support and 0 outside.  The q > 1 regime has an extra point mass at zero
    and is rejected here.
    """
    if not 0 < q <= 1:
        raise MeasureError(f"density defined for 0 < q <= 1, got q={q}")
    sq = np.sqrt(q)
    lo, hi = (1 - sq) ** 2, (1 + sq) ** 2
    lam_arr = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam_arr)
    mask = (lam_arr > lo) & (lam_arr < hi)
    vals = lam_arr[mask]
    out[mask] = np.sqrt((hi - vals) * (vals - lo)) / (2.0 * np.pi * q * vals)
    if np.isscalar(lam):
        return float(out)
    return out


@dataclass(frozen=True, eq=False)
class RmtSplit:
    """Three-way spectral split ``C = random + group + market``."""

    random_part: np.ndarray
    group_part: np.ndarray
    market_part: np.ndarray
    market_eigenvalue: float | None
    n_group_modes: int
    bounds: MPBounds
    eigenvalues: np.ndarray

    @property
    def filtered(self) -> CorrelationMatrix:
        """The group component, tagged for downstream clustering."""
        params = {
            "lambda_plus": self.bounds.lambda_plus,
            "n_group_modes": self.n_group_modes,
            "market": self.market_eigenvalue is not None,
        }
        return CorrelationMatrix(self.group_part, "rmt_filtered", params=params)


def rmt_split(C: CorrelationMatrix, T: int,
              one_sign_fraction: float = MARKET_ONE_SIGN_FRACTION) -> RmtSplit:
    """Split a Pearson-type correlation matrix into random/group/market parts.

    The largest eigenvalue is labeled the market mode only when it exceeds
    the upper bulk edge *and* its eigenvector is at least
    ``one_sign_fraction`` one-signed; other above-edge eigenvalues form the
    group part, and the bulk (ties included) forms the random part.  The
    three parts are spectral projections, so they reconstruct the input and
    are mutually orthogonal.
    """
    if not isinstance(C, CorrelationMatrix):
        raise MeasureError("rmt_split expects a CorrelationMatrix")
    if C.measure not in _SPLITTABLE:
        raise MeasureError(
            f"rmt_split applies to Pearson-type matrices, got {C.measure!r}"
        )
    M = check_symmetric(C.values, name="correlation matrix")
    N = M.shape[0]
    bounds = mp_bounds(N, T)

    vals, vecs = np.linalg.eigh(M)
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]

    above = vals > bounds.lambda_plus
    market = np.zeros_like(above)
    if above[0]:
        v = vecs[:, 0]
        frac = max(float((v >= 0).mean()), float((v <= 0).mean()))
        if frac >= one_sign_fraction:
            market[0] = True
    group = above & ~market
    bulk = ~above

    def project(mask: np.ndarray) -> np.ndarray:
        if not mask.any():
            return np.zeros_like(M)
        part = (vecs[:, mask] * vals[mask]) @ vecs[:, mask].T
        return (part + part.T) / 2.0

    return RmtSplit(
        random_part=project(bulk),
        group_part=project(group),
        market_part=project(market),
        market_eigenvalue=float(vals[0]) if market[0] else None,
        n_group_modes=int(group.sum()),
        bounds=bounds,
        eigenvalues=vals,
    )


def eigenvalue_histogram(eigenvalues: np.ndarray, lambda_plus: float, bins: int = 50):
    """Fixed-rule histogram of a spectrum, for plot-ready CSV output."""
    vals = np.asarray(eigenvalues, dtype=float)
    lo = min(0.0, float(vals.min()) - 0.05)
    hi = max(float(vals.max()), lambda_plus) + 0.05
    counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
    centers = (edges[:-1] + edges[1:]) / 2.0
    return centers, counts
