"""Command line front end.

Subcommands wire ingestion, synthesis, correlation measures, graph
filtering, clustering, cluster-count tuning, rolling-window dynamics, and
grayscale rendering into deterministic batch runs.  Every command writes a
manifest listing its outputs with content hashes; reruns with the same
inputs, config, and seed are byte-identical.

Options may come from a flat key-value config file (``--config``), where
keys carry the subcommand as a section prefix::

    seed = 7
    out = runs/example
    corr.measures = pearson,event_sync
    dynamics.method = mst_louvain

Command line flags win over config file entries.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import io as gio
from .cluster import (
    DEFAULT_N_CLUSTERS,
    location_proxy,
    misclassified_vs_reference,
    tune_clusters,
)
from .dynamics import (
    MOVING_STD_WINDOW,
    WINDOW_HOURS,
    DynamicsConfig,
    moving_std,
    run_dynamics,
    track_summary,
)
from .exceptions import GridcorrError
from .graphs import corr_to_distance, mst, pmfg, threshold_graph
from .measures import (
    DEFAULT_STRING_P,
    DEFAULT_TAU,
    DEFAULT_THETA,
    CorrelationMatrix,
    pearson,
)
from .panel import IngestionConfig, compute_delta, load_panel, write_panel
from .pipeline import MeasureParams, compute_measure, compute_partition
from .rmt import eigenvalue_histogram, rmt_split
from .sparse import DEFAULT_RHO
from .synth import SynthSpec, generate_block_panel

MEASURE_ALIASES = {"rmt": "rmt_filtered"}

CORR_MEASURES = ("pearson", "smoothed_pearson", "event_sync", "rmt_filtered",
                 "sparse", "string")
PANEL_ONLY_MEASURES = ("pearson", "smoothed_pearson", "event_sync",
                       "rmt_filtered", "sparse")


def _read_config(path) -> dict:
    config: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise GridcorrError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                config[key.strip()] = value.strip()
    except OSError as exc:
        raise GridcorrError(f"cannot read config {path}: {exc}") from exc
    return config


class _Resolver:
    """Merge CLI values, config file entries, and defaults (CLI wins)."""

    def __init__(self, args: argparse.Namespace, section: str):
        self.args = args
        self.section = section
        self.config = _read_config(args.config) if args.config else {}

    def get(self, dest: str, default, cast=None):
        value = getattr(self.args, dest, None)
        if value is None:
            key = f"{self.section}.{dest}"
            if key in self.config:
                value = self.config[key]
            elif dest in ("seed", "out") and dest in self.config:
                value = self.config[dest]
        if value is None:
            return default
        if cast is not None and isinstance(value, str):
            return cast(value)
        return value


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise GridcorrError(f"expected a boolean, got {text!r}")


def _parse_measures(text, allowed, parser) -> tuple:
    if isinstance(text, (list, tuple)):
        names = list(text)
    else:
        names = [t.strip() for t in str(text).split(",") if t.strip()]
    resolved = []
    for name in names:
        name = MEASURE_ALIASES.get(name, name)
        if name not in allowed:
            parser.error(f"unknown measure {name!r}; choose from {', '.join(allowed)}")
        if name not in resolved:
            resolved.append(name)
    if not resolved:
        parser.error("at least one measure is required")
    return tuple(resolved)


def _load_source(res: _Resolver):
    """Resolve the analysis panel from --panel, --da/--rt, or --synth-spec.

    A synthetic source reproduces from the seed embedded in its sidecar.
    """
    panel_path = res.get("panel", None)
    da_path = res.get("da", None)
    rt_path = res.get("rt", None)
    spec_path = res.get("synth_spec", None)
    sources = [s for s in (panel_path, da_path, spec_path) if s]
    if len(sources) != 1:
        raise GridcorrError(
            "exactly one input source is required: --panel, --da [--rt], or --synth-spec"
        )
    schema = IngestionConfig(
        layout=res.get("layout", "wide"),
        timestamp_column=res.get("timestamp_column", "timestamp"),
        forward_fill_limit=res.get("fill_limit", 0, int),
        drop_zero_variance=res.get("drop_zero_variance", False, _parse_bool),
        drop_missing=res.get("drop_missing", False, _parse_bool),
    )
    if spec_path:
        with open(spec_path, "r", encoding="utf-8") as fh:
            spec = SynthSpec.from_dict(json.load(fh))
        panel, _ = generate_block_panel(spec)
        return panel
    if panel_path:
        panel, _ = load_panel(panel_path, schema)
        return panel
    da, _ = load_panel(da_path, schema)
    if rt_path:
        rt, _ = load_panel(rt_path, schema)
        return compute_delta(da, rt)
    return da


def _measure_params(res: _Resolver) -> MeasureParams:
    return MeasureParams(
        theta=res.get("theta", DEFAULT_THETA, float),
        tau=res.get("tau", DEFAULT_TAU, int),
        rho=res.get("rho", DEFAULT_RHO, float),
        string_p=res.get("string_p", DEFAULT_STRING_P, int),
    )


def _out_dir(res: _Resolver) -> str:
    out = res.get("out", "gridcorr_out")
    os.makedirs(out, exist_ok=True)
    return out


def _resolved_config(res: _Resolver, **extra) -> dict:
    payload = {"seed": extra.pop("seed", None)}
    payload.update(extra)
    return {k: v for k, v in sorted(payload.items()) if v is not None}


# -- subcommand implementations ------------------------------------------------


def _cmd_ingest(args, parser) -> int:
    res = _Resolver(args, "ingest")
    out = _out_dir(res)
    da_path = res.get("da", None)
    rt_path = res.get("rt", None)
    if not da_path:
        parser.error("ingest requires --da (optionally with --rt)")
    schema = IngestionConfig(
        layout=res.get("layout", "wide"),
        timestamp_column=res.get("timestamp_column", "timestamp"),
        component=res.get("component", "LMP"),
        forward_fill_limit=res.get("fill_limit", 0, int),
        drop_zero_variance=res.get("drop_zero_variance", False, _parse_bool),
        drop_missing=res.get("drop_missing", False, _parse_bool),
    )
    written = []
    da, report = load_panel(da_path, schema)
    path = os.path.join(out, "panel_da.csv")
    write_panel(da, path)
    written.append(path)
    report_payload = {
        "dropped_zero_variance": list(report.dropped_zero_variance),
        "dropped_missing": list(report.dropped_missing),
        "imputed_count": report.imputed_count,
    }
    path = os.path.join(out, "report_da.json")
    gio.write_text_atomic(path, json.dumps(report_payload, sort_keys=True))
    written.append(path)
    if rt_path:
        rt, rt_report = load_panel(rt_path, schema)
        path = os.path.join(out, "panel_rt.csv")
        write_panel(rt, path)
        written.append(path)
        payload = {
            "dropped_zero_variance": list(rt_report.dropped_zero_variance),
            "dropped_missing": list(rt_report.dropped_missing),
            "imputed_count": rt_report.imputed_count,
        }
        path = os.path.join(out, "report_rt.json")
        gio.write_text_atomic(path, json.dumps(payload, sort_keys=True))
        written.append(path)
        delta = compute_delta(da, rt)
        path = os.path.join(out, "panel_delta.csv")
        write_panel(delta, path)
        written.append(path)
    config = _resolved_config(res, command="ingest", da=da_path, rt=rt_path,
                              layout=schema.layout,
                              fill_limit=schema.forward_fill_limit,
                              drop_zero_variance=schema.drop_zero_variance,
                              drop_missing=schema.drop_missing)
    gio.write_manifest(out, "ingest", config, written)
    return 0


def _cmd_synth(args, parser) -> int:
    res = _Resolver(args, "synth")
    out = _out_dir(res)
    seed = res.get("seed", 0, int)
    switch = res.get("switch_window", None, int)
    spec = SynthSpec(
        n_blocks=res.get("blocks", 4, int),
        nodes_per_block=res.get("nodes_per_block", 25, int),
        T=res.get("hours", 2000, int),
        intra_corr=res.get("intra_corr", 0.6, float),
        market_beta=res.get("market_beta", 0.0, float),
        spike_rate=res.get("spike_rate", 0.0, float),
        spike_scale=res.get("spike_scale", 10.0, float),
        regime_switch_window=switch,
        seed=seed,
    )
    panel, truth = generate_block_panel(spec)
    written = []
    path = os.path.join(out, "panel.csv")
    write_panel(panel, path)
    written.append(path)
    path = os.path.join(out, "synth_spec.json")
    gio.write_text_atomic(path, json.dumps(spec.to_dict(), sort_keys=True))
    written.append(path)
    path = os.path.join(out, "ground_truth.csv")
    gio.write_partition_csv(path, truth, panel.node_names)
    written.append(path)
    path = os.path.join(out, "ground_truth.json")
    gio.write_partition_json(path, truth, panel.node_names)
    written.append(path)
    gio.write_manifest(out, "synth",
                       _resolved_config(res, command="synth", **spec.to_dict()),
                       written)
    return 0


def _cmd_corr(args, parser) -> int:
    res = _Resolver(args, "corr")
    out = _out_dir(res)
    seed = res.get("seed", 0, int)
    measures = _parse_measures(res.get("measures", "pearson"), CORR_MEASURES, parser)
    panel = _load_source(res)
    params = _measure_params(res)
    written = []
    for measure in measures:
        matrix = compute_measure(panel, measure, params)
        stem = os.path.join(out, f"corr_{measure}")
        gio.write_matrix_csv(f"{stem}.csv", matrix, panel.node_names)
        gio.write_matrix_json(f"{stem}.json", matrix, panel.node_names)
        written.extend([f"{stem}.csv", f"{stem}.json"])
        if measure == "rmt_filtered":
            split = rmt_split(pearson(panel), panel.n_hours)
            for name, part in (("random", split.random_part),
                               ("market", split.market_part)):
                part_path = os.path.join(out, f"corr_rmt_{name}.csv")
                gio.write_values_csv(part_path, part, panel.node_names)
                written.append(part_path)
            centers, counts = eigenvalue_histogram(
                split.eigenvalues, split.bounds.lambda_plus
            )
            hist_path = os.path.join(out, "eigenvalue_histogram.csv")
            gio.write_histogram_csv(hist_path, centers, counts)
            written.append(hist_path)
    config = _resolved_config(res, command="corr", seed=seed,
                              measures=",".join(measures),
                              theta=params.theta, tau=params.tau, rho=params.rho,
                              string_p=params.string_p)
    gio.write_manifest(out, "corr", config, written)
    return 0


def _cmd_filter(args, parser) -> int:
    res = _Resolver(args, "filter")
    out = _out_dir(res)
    matrix_path = res.get("matrix", None)
    if not matrix_path:
        parser.error("filter requires --matrix ENVELOPE.json")
    kind = res.get("kind", "mst")
    if kind not in ("mst", "pmfg", "threshold"):
        parser.error(f"unknown filter kind {kind!r}")
    envelope = gio.read_matrix_json(matrix_path)
    matrix = CorrelationMatrix(envelope["values"], envelope["measure"],
                               params=envelope["params"])
    if kind == "mst":
        D, _ = corr_to_distance(matrix)
        graph = mst(D, source_measure=matrix.measure)
    elif kind == "pmfg":
        graph = pmfg(matrix)
    else:
        graph = threshold_graph(matrix, quantile=res.get("quantile", 0.5, float))
    written = gio.write_graph(os.path.join(out, f"filter_{kind}"), graph,
                              node_names=envelope["nodes"])
    config = _resolved_config(res, command="filter", matrix=matrix_path, kind=kind)
    gio.write_manifest(out, "filter", config, written)
    return 0


def _cmd_cluster(args, parser) -> int:
    res = _Resolver(args, "cluster")
    out = _out_dir(res)
    seed = res.get("seed", 0, int)
    measures = _parse_measures(res.get("measures", "pearson"), PANEL_ONLY_MEASURES, parser)
    method = res.get("method", "spectral")
    if method not in ("spectral", "mst_louvain"):
        parser.error(f"unknown clustering method {method!r}")
    k = res.get("k", DEFAULT_N_CLUSTERS, int)
    panel = _load_source(res)
    params = _measure_params(res)
    proxy = location_proxy(panel.nodes, k, p=params.string_p, seed=seed)
    written = []
    path = os.path.join(out, "partition_location_proxy.csv")
    gio.write_partition_csv(path, proxy, panel.node_names)
    written.append(path)
    for measure in measures:
        matrix = compute_measure(panel, measure, params)
        part, tree = compute_partition(matrix, method, k=k, seed=seed)
        flags = misclassified_vs_reference(part, proxy)
        stem = os.path.join(out, f"partition_{measure}_{method}")
        gio.write_partition_csv(f"{stem}.csv", part, panel.node_names, flags=flags)
        gio.write_partition_json(f"{stem}.json", part, panel.node_names)
        written.extend([f"{stem}.csv", f"{stem}.json"])
        if tree is not None:
            written.extend(gio.write_graph(os.path.join(out, f"mst_{measure}"), tree,
                                           node_names=panel.node_names))
    config = _resolved_config(res, command="cluster", seed=seed, method=method, k=k,
                              measures=",".join(measures))
    gio.write_manifest(out, "cluster", config, written)
    return 0


def _cmd_tune(args, parser) -> int:
    res = _Resolver(args, "tune")
    out = _out_dir(res)
    seed = res.get("seed", 0, int)
    measures = _parse_measures(res.get("measures", "pearson"), PANEL_ONLY_MEASURES, parser)
    panel = _load_source(res)
    n_min = res.get("n_min", 1, int)
    n_max = res.get("n_max", min(panel.n_nodes, 300), int)
    n_step = res.get("n_step", 1, int)
    curves = tune_clusters(panel, measures, range(n_min, n_max + 1, n_step), seed=seed)
    path = os.path.join(out, "tuning_curves.csv")
    gio.write_curves_csv(path, curves)
    config = _resolved_config(res, command="tune", seed=seed, n_min=n_min,
                              n_max=n_max, n_step=n_step,
                              measures=",".join(measures))
    gio.write_manifest(out, "tune", config, [path])
    return 0


def _cmd_dynamics(args, parser) -> int:
    res = _Resolver(args, "dynamics")
    out = _out_dir(res)
    seed = res.get("seed", 0, int)
    measures = _parse_measures(res.get("measures", "pearson"), PANEL_ONLY_MEASURES, parser)
    method = res.get("method", "spectral")
    cfg = DynamicsConfig(
        measures=measures,
        method=method,
        k=res.get("k", DEFAULT_N_CLUSTERS, int),
        window_hours=res.get("window_hours", WINDOW_HOURS, int),
        benchmark_window=res.get("benchmark_window", None, int),
        moving_std_window=res.get("moving_std_window", MOVING_STD_WINDOW, int),
        theta=res.get("theta", DEFAULT_THETA, float),
        tau=res.get("tau", DEFAULT_TAU, int),
        rho=res.get("rho", DEFAULT_RHO, float),
        string_p=res.get("string_p", DEFAULT_STRING_P, int),
        seed=seed,
    )
    panel = _load_source(res)
    tracks = run_dynamics(panel, None, cfg)
    written = []
    summaries = []
    std_rows = []
    for track in tracks:
        path = os.path.join(out, f"dynamics_{track.measure}_{track.method}.csv")
        gio.write_track_csv(path, track)
        written.append(path)
        summaries.append(track_summary(track))
        # Tracks shorter than the smoothing window contribute no rows.
        if len(track) >= cfg.moving_std_window:
            stds = moving_std(track.ari_location, cfg.moving_std_window)
            start = cfg.moving_std_window - 1
            std_rows.extend(
                (track.measure, start + i, float(v)) for i, v in enumerate(stds)
            )
    path = os.path.join(out, "moving_std.csv")
    gio.write_moving_std_csv(path, std_rows)
    written.append(path)
    path = os.path.join(out, "summary.json")
    gio.write_text_atomic(path, json.dumps(summaries, sort_keys=True, indent=2))
    written.append(path)
    config = _resolved_config(res, command="dynamics", seed=seed, method=method,
                              k=cfg.k, window_hours=cfg.window_hours,
                              moving_std_window=cfg.moving_std_window,
                              measures=",".join(measures))
    gio.write_manifest(out, "dynamics", config, written)
    return 0


def _cmd_render(args, parser) -> int:
    res = _Resolver(args, "render")
    out = _out_dir(res)
    matrix_path = res.get("matrix", None)
    if not matrix_path:
        parser.error("render requires --matrix ENVELOPE.json")
    envelope = gio.read_matrix_json(matrix_path)
    name = res.get("output", None)
    if not name:
        stem = os.path.splitext(os.path.basename(matrix_path))[0]
        name = f"{stem}.pgm"
    path = os.path.join(out, name)
    gio.write_bytes_atomic(path, gio.render_pgm(envelope["values"]))
    config = _resolved_config(res, command="render", matrix=matrix_path, output=name)
    gio.write_manifest(out, "render", config, [path])
    return 0


# -- parser construction ---------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key-value config file")
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--out", help="output directory (default gridcorr_out)")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--panel", help="CSV of the analysis panel")
    source.add_argument("--da", help="day-ahead CSV (with --rt gives the difference panel)")
    source.add_argument("--rt", help="real-time CSV")
    source.add_argument("--synth-spec", dest="synth_spec",
                        help="JSON sidecar of a synthetic panel spec")
    source.add_argument("--layout", choices=("wide", "long"))
    source.add_argument("--timestamp-column", dest="timestamp_column")
    source.add_argument("--fill-limit", dest="fill_limit", type=int)
    source.add_argument("--drop-zero-variance", dest="drop_zero_variance",
                        action="store_const", const=True)
    source.add_argument("--drop-missing", dest="drop_missing",
                        action="store_const", const=True)

    measure_opts = argparse.ArgumentParser(add_help=False)
    measure_opts.add_argument("--measures", help="comma separated measure names")
    measure_opts.add_argument("--theta", type=float, help="smoothing decay factor")
    measure_opts.add_argument("--tau", type=int, help="event synchronization lag (hours)")
    measure_opts.add_argument("--rho", type=float, help="sparse estimation penalty")
    measure_opts.add_argument("--string-p", dest="string_p", type=int,
                              help="string kernel gram length")

    parser = argparse.ArgumentParser(
        prog="gridcorr",
        description="Correlation, filtering, and clustering analysis of hourly price panels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common, source],
                       help="validate CSV price files and write canonical panels")
    p.add_argument("--component", choices=("LMP", "MEC", "MCC", "MLC", "DELTA"))
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", parents=[common],
                       help="generate a synthetic panel with planted blocks")
    p.add_argument("--blocks", type=int)
    p.add_argument("--nodes-per-block", dest="nodes_per_block", type=int)
    p.add_argument("--hours", type=int)
    p.add_argument("--intra-corr", dest="intra_corr", type=float)
    p.add_argument("--market-beta", dest="market_beta", type=float)
    p.add_argument("--spike-rate", dest="spike_rate", type=float)
    p.add_argument("--spike-scale", dest="spike_scale", type=float)
    p.add_argument("--switch-window", dest="switch_window", type=int)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("corr", parents=[common, source, measure_opts],
                       help="compute correlation matrices")
    p.set_defaults(func=_cmd_corr)

    p = sub.add_parser("filter", parents=[common],
                       help="build a filtered graph from a matrix envelope")
    p.add_argument("--matrix", help="matrix envelope JSON")
    p.add_argument("--kind", choices=("mst", "pmfg", "threshold"))
    p.add_argument("--quantile", type=float)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("cluster", parents=[common, source, measure_opts],
                       help="partition nodes per measure and method")
    p.add_argument("--method", choices=("spectral", "mst_louvain"))
    p.add_argument("--k", type=int)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("tune", parents=[common, source, measure_opts],
                       help="sweep the cluster count against the location proxy")
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--n-step", dest="n_step", type=int)
    p.set_defaults(func=_cmd_tune)

    p = sub.add_parser("dynamics", parents=[common, source, measure_opts],
                       help="rolling-window correlation and clustering tracks")
    p.add_argument("--method", choices=("spectral", "mst_louvain"))
    p.add_argument("--k", type=int)
    p.add_argument("--window-hours", dest="window_hours", type=int)
    p.add_argument("--benchmark-window", dest="benchmark_window", type=int)
    p.add_argument("--moving-std-window", dest="moving_std_window", type=int)
    p.set_defaults(func=_cmd_dynamics)

    p = sub.add_parser("render", parents=[common],
                       help="render a matrix envelope as an 8-bit graymap")
    p.add_argument("--matrix", help="matrix envelope JSON")
    p.add_argument("--output", help="image file name inside the output directory")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except GridcorrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
