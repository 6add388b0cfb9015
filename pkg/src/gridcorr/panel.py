"""Hourly price panels: node identifiers, CSV ingestion, validation, slicing.

The panel is the universal input of every correlation measure: an N x T
matrix of hourly values, one row per named node, over a strictly
contiguous hourly time axis.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .exceptions import PanelError

HOUR = timedelta(hours=1)

COMPONENTS = ("LMP", "MEC", "MCC", "MLC", "DELTA")

_DEFAULT_START = datetime(2012, 1, 1, 0, 0, 0)


@dataclass(frozen=True)
class NodeName:
    """Node identifier of the form ``PLACE_CODE``, split on the last underscore."""

    raw: str
    place: str
    code: str

    def __str__(self) -> str:
        return self.raw

    @property
    def has_code(self) -> bool:
        return self.code != ""


def parse_node_name(raw: str) -> NodeName:
    """Split a node identifier into its place and code parts.

    The split happens at the *last* underscore, so ``"A_B_C"`` yields place
    ``"A_B"`` and code ``"C"``.  Names that cannot be split with a
    non-empty place (no underscore at all, or a leading underscore like
    ``"_X"``) keep the whole string as the place and carry an empty code,
    which callers can detect through :attr:`NodeName.has_code`.  Only the
    empty string is rejected.
    """
    if not isinstance(raw, str) or raw == "":
        raise PanelError("node name must be a non-empty string")
    place, sep, code = raw.rpartition("_")
    if not sep or not place:
        return NodeName(raw=raw, place=raw, code="")
    return NodeName(raw=raw, place=place, code=code)


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Immutable N x T matrix of hourly values with node and time identities.

    Invariants enforced at construction: at least 2 nodes and 2 hours, no
    missing entries, and a strictly contiguous hourly time axis.
    """

    values: np.ndarray
    nodes: tuple[NodeName, ...]
    timestamps: tuple[datetime, ...]
    component: str = "LMP"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise PanelError(f"panel values must be 2-d, got ndim={values.ndim}")
        n, t = values.shape
        if n < 2 or t < 2:
            raise PanelError(f"panel needs at least 2 nodes and 2 hours, got {n} x {t}")
        nodes = tuple(self.nodes)
        timestamps = tuple(self.timestamps)
        if len(nodes) != n:
            raise PanelError(f"{len(nodes)} node names for {n} rows")
        if len(timestamps) != t:
            raise PanelError(f"{len(timestamps)} timestamps for {t} columns")
        if not all(isinstance(nd, NodeName) for nd in nodes):
            raise PanelError("nodes must be NodeName instances")
        if not np.isfinite(values).all():
            raise PanelError("panel contains missing or non-finite values")
        for prev, cur in zip(timestamps, timestamps[1:]):
            if cur - prev != HOUR:
                raise PanelError(
                    f"timestamps must advance in exact one hour steps, got {prev} -> {cur}"
                )
        if self.component not in COMPONENTS:
            raise PanelError(f"unknown component {self.component!r}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "timestamps", timestamps)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_hours(self) -> int:
        return self.values.shape[1]

    @property
    def node_names(self) -> list[str]:
        return [nd.raw for nd in self.nodes]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PricePanel):
            return NotImplemented
        return (
            self.component == other.component
            and self.nodes == other.nodes
            and self.timestamps == other.timestamps
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
        )

    @classmethod
    def from_values(cls, values, nodes=None, start: datetime | None = None,
                    component: str = "DELTA") -> "PricePanel":
        """Build a panel from a bare array, synthesizing names and hourly axis."""
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise PanelError("from_values expects a 2-d array")
        n, t = values.shape
        if nodes is None:
            nodes = tuple(parse_node_name(f"S{i}_N{i}") for i in range(n))
        else:
            nodes = tuple(
                nd if isinstance(nd, NodeName) else parse_node_name(nd) for nd in nodes
            )
        start = start or _DEFAULT_START
        timestamps = tuple(start + i * HOUR for i in range(t))
        return cls(values=values, nodes=nodes, timestamps=timestamps, component=component)


@dataclass(frozen=True)
class ValidationReport:
    """What ingestion dropped or imputed, with indices into the loaded column order."""

    dropped_zero_variance: tuple[int, ...] = ()
    dropped_missing: tuple[int, ...] = ()
    imputed_count: int = 0

    def __post_init__(self):
        if set(self.dropped_zero_variance) & set(self.dropped_missing):
            raise PanelError("a node index cannot be dropped for two reasons")


@dataclass(frozen=True)
class IngestionConfig:
    """How to read a CSV price file.

    ``layout`` is ``"wide"`` (one column per node) or ``"long"``
    (timestamp,node,value rows).  ``forward_fill_limit`` is the longest run
    of consecutive missing hours that may be imputed by carrying the last
    value forward; 0 turns imputation off and makes any gap a hard error,
    3 covers a typical short telemetry outage.
    """

    layout: str = "wide"
    timestamp_column: str = "timestamp"
    node_column: str = "node"
    value_column: str = "value"
    component: str = "LMP"
    forward_fill_limit: int = 0
    drop_zero_variance: bool = False
    drop_missing: bool = False

    def __post_init__(self):
        if self.layout not in ("wide", "long"):
            raise PanelError(f"layout must be 'wide' or 'long', got {self.layout!r}")
        if self.forward_fill_limit < 0:
            raise PanelError("forward_fill_limit must be >= 0")
        if self.component not in COMPONENTS:
            raise PanelError(f"unknown component {self.component!r}")


def _parse_timestamp(text: str) -> datetime:
    try:
        ts = datetime.fromisoformat(text.strip())
    except ValueError as exc:
        raise PanelError(f"unparseable timestamp {text!r}") from exc
    if ts.minute or ts.second or ts.microsecond:
        raise PanelError(f"non-hourly cadence: timestamp {text!r} is not on the hour")
    return ts


def _parse_value(text: str) -> float:
    text = text.strip()
    if text == "" or text.lower() == "nan":
        return float("nan")
    try:
        return float(text)
    except ValueError as exc:
        raise PanelError(f"unparseable value {text!r}") from exc


def _read_rows(path) -> list[list[str]]:
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PanelError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise PanelError(f"{path} is empty")
    return rows


def _table_from_wide(rows, schema):
    header = rows[0]
    if not header or header[0] != schema.timestamp_column:
        raise PanelError(
            f"wide layout expects first column {schema.timestamp_column!r}, got {header[:1]}"
        )
    names = header[1:]
    if len(set(names)) != len(names):
        raise PanelError("duplicate node columns in header")
    stamped = {}
    for row in rows[1:]:
        if len(row) != len(header):
            raise PanelError(f"row width {len(row)} does not match header width {len(header)}")
        ts = _parse_timestamp(row[0])
        if ts in stamped:
            raise PanelError(f"duplicate (timestamp,node) pairs: repeated row for {ts}")
        stamped[ts] = [_parse_value(v) for v in row[1:]]
    return names, stamped


def _table_from_long(rows, schema):
    header = rows[0]
    try:
        i_ts = header.index(schema.timestamp_column)
        i_node = header.index(schema.node_column)
        i_val = header.index(schema.value_column)
    except ValueError as exc:
        raise PanelError(f"long layout header must name timestamp, node and value columns") from exc
    names: list[str] = []
    seen: dict[tuple[datetime, str], float] = {}
    for row in rows[1:]:
        ts = _parse_timestamp(row[i_ts])
        node = row[i_node].strip()
        key = (ts, node)
        if key in seen:
            raise PanelError(f"duplicate (timestamp,node) pairs: {node} at {ts}")
        seen[key] = _parse_value(row[i_val])
        if node not in names:
            names.append(node)
    stamps = sorted({ts for ts, _ in seen})
    stamped = {
        ts: [seen.get((ts, node), float("nan")) for node in names] for ts in stamps
    }
    return names, stamped


def _forward_fill(col: np.ndarray, limit: int):
    """Fill NaN runs of length <= limit with the preceding value.

    Returns the filled column, the number of imputed cells, and whether any
    missing value could not be resolved.
    """
    col = col.copy()
    imputed = 0
    unresolved = False
    t = 0
    T = col.shape[0]
    while t < T:
        if not np.isnan(col[t]):
            t += 1
            continue
        run_start = t
        while t < T and np.isnan(col[t]):
            t += 1
        run = t - run_start
        if run_start == 0 or run > limit:
            unresolved = True
        else:
            col[run_start:t] = col[run_start - 1]
            imputed += run
    return col, imputed, unresolved


def load_panel(path, schema: IngestionConfig | None = None):
    """Load and validate a CSV price file.

    Returns ``(PricePanel, ValidationReport)``.  Rows are sorted by
    timestamp; gaps in the hourly grid are either imputed (when the schema
    allows forward filling) or rejected.  Constant series can optionally be
    dropped, since they have no defined Pearson correlation.
    """
    schema = schema or IngestionConfig()
    rows = _read_rows(path)
    if schema.layout == "wide":
        names, stamped = _table_from_wide(rows, schema)
    else:
        names, stamped = _table_from_long(rows, schema)
    if not stamped:
        raise PanelError(f"{path} has a header but no data rows")

    stamps = sorted(stamped)
    first, last = stamps[0], stamps[-1]
    grid = []
    cur = first
    while cur <= last:
        grid.append(cur)
        cur += HOUR
    has_gaps = len(grid) != len(stamps)
    if has_gaps and schema.forward_fill_limit == 0:
        raise PanelError(
            "time axis has gaps; set forward_fill_limit to impute short outages"
        )

    nan_row = [float("nan")] * len(names)
    matrix = np.array([stamped.get(ts, nan_row) for ts in grid], dtype=float).T

    imputed_total = 0
    dropped_missing: list[int] = []
    keep = np.ones(len(names), dtype=bool)
    for idx in range(len(names)):
        col, imputed, unresolved = _forward_fill(matrix[idx], schema.forward_fill_limit)
        if unresolved:
            if schema.drop_missing:
                dropped_missing.append(idx)
                keep[idx] = False
                continue
            raise PanelError(f"node {names[idx]!r} has missing values beyond the fill limit")
        matrix[idx] = col
        imputed_total += imputed

    dropped_zero_variance: list[int] = []
    if schema.drop_zero_variance:
        for idx in range(len(names)):
            if keep[idx] and np.ptp(matrix[idx]) == 0.0:
                dropped_zero_variance.append(idx)
                keep[idx] = False

    if keep.sum() < 2:
        raise PanelError("fewer than 2 usable nodes remain after validation")

    panel = PricePanel(
        values=matrix[keep],
        nodes=tuple(parse_node_name(names[i]) for i in np.flatnonzero(keep)),
        timestamps=tuple(grid),
        component=schema.component,
    )
    report = ValidationReport(
        dropped_zero_variance=tuple(dropped_zero_variance),
        dropped_missing=tuple(dropped_missing),
        imputed_count=imputed_total,
    )
    return panel, report


def write_panel(panel: PricePanel, path) -> None:
    """Write a panel as a wide CSV that :func:`load_panel` reads back bit-exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", *panel.node_names])
        for t, ts in enumerate(panel.timestamps):
            writer.writerow([ts.isoformat(), *[repr(float(v)) for v in panel.values[:, t]]])


def compute_delta(da: PricePanel, rt: PricePanel) -> PricePanel:
    """Element-wise day-ahead minus real-time panel.

    Both panels must carry identical node lists and time axes; no silent
    realignment happens here.
    """
    if da.node_names != rt.node_names:
        raise PanelError("day-ahead and real-time panels list different nodes")
    if da.timestamps != rt.timestamps:
        raise PanelError("day-ahead and real-time panels cover different hours")
    return PricePanel(
        values=da.values - rt.values,
        nodes=da.nodes,
        timestamps=da.timestamps,
        component="DELTA",
    )


def slice_window(panel: PricePanel, start: int, width: int) -> PricePanel:
    """Contiguous sub-panel of ``width`` hours beginning at column ``start``."""
    if start < 0 or width < 1 or start + width > panel.n_hours:
        raise PanelError(
            f"window [{start}, {start + width}) out of range for T={panel.n_hours}"
        )
    return PricePanel(
        values=panel.values[:, start:start + width],
        nodes=panel.nodes,
        timestamps=panel.timestamps[start:start + width],
        component=panel.component,
    )
