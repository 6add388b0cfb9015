"""Exception hierarchy shared across the package."""


class GridcorrError(ValueError):
    """Base class for all data and contract violations raised by gridcorr."""


class PanelError(GridcorrError):
    """Raised when a price panel or its ingestion input is invalid."""


class MeasureError(GridcorrError):
    """Raised when a correlation measure is undefined for its input."""


class GraphError(GridcorrError):
    """Raised when a filtered graph cannot be built or is malformed."""


class ClusterError(GridcorrError):
    """Raised when a partitioning request is infeasible."""
