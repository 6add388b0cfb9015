"""Correlation measures, matrix filtering, and cluster reconstruction for
panels of spiky hourly price series."""

from .cluster import (
    DEFAULT_N_CLUSTERS,
    Partition,
    TuningCurve,
    location_proxy,
    louvain,
    misclassified_vs_reference,
    modularity,
    ns_mapping,
    spectral_clustering,
    tune_clusters,
)
from .dynamics import (
    MOVING_STD_WINDOW,
    WINDOW_HOURS,
    DynamicsConfig,
    WindowTrack,
    moving_std,
    run_dynamics,
    track_summary,
    window_stats,
)
from .exceptions import (
    ClusterError,
    GraphError,
    GridcorrError,
    MeasureError,
    PanelError,
)
from .graphs import (
    FilteredGraph,
    corr_to_distance,
    mst,
    mst_from_correlation,
    pmfg,
    threshold_graph,
    with_correlation_weights,
)
from .measures import (
    DEFAULT_STRING_P,
    DEFAULT_TAU,
    DEFAULT_THETA,
    CorrelationMatrix,
    TernarySeries,
    WeightVector,
    event_sync_matrix,
    event_sync_original,
    exponential_weights,
    pearson,
    smoothed_pearson,
    string_correlation,
    ternary_filter,
    weighted_pearson,
)
from .metrics import (
    ContingencyTable,
    adjusted_rand_index,
    contingency,
    disparity,
    rand_index,
)
from .panel import (
    IngestionConfig,
    NodeName,
    PricePanel,
    ValidationReport,
    compute_delta,
    load_panel,
    parse_node_name,
    slice_window,
    write_panel,
)
from .pipeline import MeasureParams, compute_measure, compute_partition
from .rmt import MPBounds, RmtSplit, eigenvalue_histogram, mp_bounds, mp_density, rmt_split
from .sparse import (
    DEFAULT_RHO,
    SparseConfig,
    SparseSolveReport,
    pd_projection,
    soft_threshold_offdiag,
    sparse_correlation,
)
from .synth import SynthSpec, generate_block_panel, generate_random_panel

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
