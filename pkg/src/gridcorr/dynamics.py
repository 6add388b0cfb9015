"""Rolling-window analysis of correlation and cluster structure.

The panel is cut into non-overlapping 168 hour windows anchored at the
first timestamp.  Per window and measure this produces the mean off-diagonal
correlation, the largest eigenvalue, the partition's size disparity, and
its agreement with a fixed benchmark window and with the location proxy.
A trailing moving standard deviation summarizes the stability of the
agreement tracks.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cluster import DEFAULT_N_CLUSTERS, location_proxy
from .exceptions import GridcorrError
from .measures import DEFAULT_STRING_P, DEFAULT_TAU, DEFAULT_THETA
from .metrics import adjusted_rand_index, disparity
from .panel import PricePanel, compute_delta, slice_window
from .pipeline import METHODS, PANEL_MEASURES, MeasureParams, compute_measure, compute_partition
from .sparse import DEFAULT_RHO

WINDOW_HOURS = 168
MOVING_STD_WINDOW = 50

THREADS_ENV_VAR = "GRIDCORR_THREADS"


@dataclass(frozen=True)
class DynamicsConfig:
    measures: tuple = ("pearson",)
    method: str = "spectral"
    k: int = DEFAULT_N_CLUSTERS
    window_hours: int = WINDOW_HOURS
    benchmark_window: int | None = None
    moving_std_window: int = MOVING_STD_WINDOW
    theta: float = DEFAULT_THETA
    tau: int = DEFAULT_TAU
    rho: float = DEFAULT_RHO
    string_p: int = DEFAULT_STRING_P
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "measures", tuple(self.measures))
        unknown = [m for m in self.measures if m not in PANEL_MEASURES]
        if unknown:
            raise GridcorrError(f"unknown measures {unknown}")
        if not self.measures:
            raise GridcorrError("at least one measure is required")
        if self.method not in METHODS:
            raise GridcorrError(f"unknown method {self.method!r}")
        if self.window_hours < 2:
            raise GridcorrError("window_hours must be >= 2")
        if self.moving_std_window < 2:
            raise GridcorrError("moving_std_window must be >= 2")

    def measure_params(self) -> MeasureParams:
        return MeasureParams(theta=self.theta, tau=self.tau, rho=self.rho,
                             string_p=self.string_p)


@dataclass(frozen=True, eq=False)
class WindowTrack:
    """Per-window statistics for one (measure, method) pair."""

    window_index: np.ndarray
    mean_corr: np.ndarray
    largest_eigenvalue: np.ndarray
    disparity: np.ndarray
    ari_benchmark: np.ndarray
    ari_location: np.ndarray
    measure: str
    method: str

    def __post_init__(self):
        lengths = {
            len(self.window_index), len(self.mean_corr), len(self.largest_eigenvalue),
            len(self.disparity), len(self.ari_benchmark), len(self.ari_location),
        }
        if len(lengths) != 1:
            raise GridcorrError("all tracks must share one length")

    def __len__(self) -> int:
        return len(self.window_index)


def window_stats(C) -> tuple:
    """(mean off-diagonal entry, largest eigenvalue) of a symmetric matrix."""
    values = getattr(C, "values", None)
    M = np.asarray(values if values is not None else C, dtype=float)
    n = M.shape[0]
    off = ~np.eye(n, dtype=bool)
    mean = float(M[off].mean())
    largest = float(np.linalg.eigvalsh(M)[-1])
    return mean, largest


def moving_std(track, w: int) -> np.ndarray:
    """Trailing sample standard deviation over windows of length ``w``."""
    track = np.asarray(track, dtype=float)
    if track.ndim != 1:
        raise GridcorrError("track must be 1-d")
    if w < 2:
        raise GridcorrError("window size must be >= 2")
    if w > track.size:
        raise GridcorrError(f"window {w} longer than track of {track.size}")
    windows = np.lib.stride_tricks.sliding_window_view(track, w)
    return windows.std(axis=1, ddof=1)


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def run_dynamics(da: PricePanel, rt: PricePanel | None, cfg: DynamicsConfig) -> list:
    """Per-window correlation, clustering, and agreement tracks.

    ``rt`` may be None when ``da`` already holds the analysis series;
    otherwise the element-wise difference panel is analyzed.  The benchmark
    defaults to the last complete window.  Windows are independent work
    units; the worker count is capped by the GRIDCORR_THREADS environment
    variable and results merge deterministically by window index.
    """
    delta = compute_delta(da, rt) if rt is not None else da
    n_windows = delta.n_hours // cfg.window_hours
    if n_windows < 2:
        raise GridcorrError(
            f"need at least 2 complete windows, got {n_windows} "
            f"({delta.n_hours} hours at {cfg.window_hours} per window)"
        )
    benchmark = cfg.benchmark_window if cfg.benchmark_window is not None else n_windows - 1
    if not 0 <= benchmark < n_windows:
        raise GridcorrError(f"benchmark window {benchmark} out of range [0, {n_windows})")

    params = cfg.measure_params()
    proxy = location_proxy(delta.nodes, cfg.k, p=cfg.string_p, seed=cfg.seed)

    def analyze(w: int) -> dict:
        sub = slice_window(delta, w * cfg.window_hours, cfg.window_hours)
        out = {}
        for measure in cfg.measures:
            C = compute_measure(sub, measure, params)
            mean, largest = window_stats(C)
            part, _ = compute_partition(C, cfg.method, k=cfg.k, seed=cfg.seed)
            try:
                disp = disparity(part)
            except GridcorrError:
                disp = float("nan")
            out[measure] = (mean, largest, disp, part)
        return out

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_window = list(pool.map(analyze, range(n_windows)))
    else:
        per_window = [analyze(w) for w in range(n_windows)]

    tracks = []
    for measure in cfg.measures:
        bench_part = per_window[benchmark][measure][3]
        rows = [per_window[w][measure] for w in range(n_windows)]
        tracks.append(WindowTrack(
            window_index=np.arange(n_windows),
            mean_corr=np.array([r[0] for r in rows]),
            largest_eigenvalue=np.array([r[1] for r in rows]),
            disparity=np.array([r[2] for r in rows]),
            ari_benchmark=np.array(
                [adjusted_rand_index(r[3], bench_part) for r in rows]
            ),
            ari_location=np.array(
                [adjusted_rand_index(r[3], proxy) for r in rows]
            ),
            measure=measure,
            method=cfg.method,
        ))
    return tracks


def track_summary(track: WindowTrack) -> dict:
    """Mean, max, and argmax window of every series in a track."""
    def stats(arr: np.ndarray) -> dict:
        arr = np.asarray(arr, dtype=float)
        if np.isnan(arr).all():
            return {"mean": None, "max": None, "argmax_window": None}
        return {
            "mean": float(np.nanmean(arr)),
            "max": float(np.nanmax(arr)),
            "argmax_window": int(np.nanargmax(arr)),
        }

    return {
        "measure": track.measure,
        "method": track.method,
        "n_windows": len(track),
        "mean_corr": stats(track.mean_corr),
        "largest_eigenvalue": stats(track.largest_eigenvalue),
        "disparity": stats(track.disparity),
        "ari_benchmark": stats(track.ari_benchmark),
        "ari_location": stats(track.ari_location),
    }
