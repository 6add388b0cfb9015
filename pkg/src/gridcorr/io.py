"""Serialization of matrices, graphs, partitions, tracks, and images.

All writers are atomic (temp file plus rename) and deterministic: floats
are written with shortest round-trip repr, JSON keys are sorted, and no
wall-clock information enters any output, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile

import numpy as np

from .exceptions import GridcorrError
from .measures import CorrelationMatrix


def _fmt(x) -> str:
    return repr(float(x))


def write_bytes_atomic(path, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path, text: str) -> None:
    write_bytes_atomic(path, text.encode("utf-8"))


def _csv_text(rows) -> str:
    import io as _io

    buf = _io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


# -- correlation matrices ---------------------------------------------------

def write_matrix_csv(path, C: CorrelationMatrix, node_names) -> None:
    write_values_csv(path, C.values, node_names)


def write_values_csv(path, values: np.ndarray, node_names) -> None:
    rows = [list(node_names)]
    for row in np.asarray(values, dtype=float):
        rows.append([_fmt(v) for v in row])
    write_text_atomic(path, _csv_text(rows))


def matrix_envelope(C: CorrelationMatrix, node_names) -> dict:
    return {
        "measure": C.measure,
        "params": C.params,
        "nodes": list(node_names),
        "values": [[float(v) for v in row] for row in C.values],
    }


def write_matrix_json(path, C: CorrelationMatrix, node_names) -> None:
    write_text_atomic(path, json.dumps(matrix_envelope(C, node_names), sort_keys=True))


def read_matrix_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    for key in ("measure", "params", "nodes", "values"):
        if key not in data:
            raise GridcorrError(f"matrix envelope is missing {key!r}")
    values = np.asarray(data["values"], dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise GridcorrError("matrix envelope values must be square")
    if len(data["nodes"]) != values.shape[0]:
        raise GridcorrError("matrix envelope node list does not match the values")
    data["values"] = values
    return data


# -- graphs ------------------------------------------------------------------

def write_graph(stem, graph, node_names=None) -> list:
    """Edge-list CSV plus a JSON header; returns the written paths."""
    csv_path = f"{stem}.csv"
    json_path = f"{stem}.json"
    rows = [["i", "j", "weight"]]
    for i, j, w in graph.edges:
        rows.append([i, j, _fmt(w)])
    write_text_atomic(csv_path, _csv_text(rows))
    header = {
        "kind": graph.kind,
        "n_vertices": graph.n_vertices,
        "n_edges": len(graph.edges),
        "source_measure": graph.source_measure,
    }
    if node_names is not None:
        header["nodes"] = list(node_names)
    write_text_atomic(json_path, json.dumps(header, sort_keys=True))
    return [csv_path, json_path]


# -- partitions ---------------------------------------------------------------

def write_partition_csv(path, partition, node_names, flags=None) -> None:
    header = ["node_name", "label"]
    if flags is not None:
        header.append("misclassified")
    rows = [header]
    for idx, name in enumerate(node_names):
        row = [name, int(partition.labels[idx])]
        if flags is not None:
            row.append(int(flags[idx]))
        rows.append(row)
    write_text_atomic(path, _csv_text(rows))


def write_partition_json(path, partition, node_names) -> None:
    payload = {
        "method": partition.method,
        "seed": partition.seed,
        "k": partition.k,
        "nodes": list(node_names),
        "labels": [int(x) for x in partition.labels],
    }
    write_text_atomic(path, json.dumps(payload, sort_keys=True))


# -- dynamics tracks -----------------------------------------------------------

def write_track_csv(path, track) -> None:
    rows = [["window_index", "mean_corr", "largest_eig", "disparity",
             "ari_benchmark", "ari_location"]]
    for w in range(len(track)):
        rows.append([
            int(track.window_index[w]),
            _fmt(track.mean_corr[w]),
            _fmt(track.largest_eigenvalue[w]),
            _fmt(track.disparity[w]),
            _fmt(track.ari_benchmark[w]),
            _fmt(track.ari_location[w]),
        ])
    write_text_atomic(path, _csv_text(rows))


def write_moving_std_csv(path, rows) -> None:
    """Rows are (measure, window_index, value) triples."""
    table = [["measure", "window_index", "moving_std_ari_location"]]
    for measure, idx, value in rows:
        table.append([measure, int(idx), _fmt(value)])
    write_text_atomic(path, _csv_text(table))


def write_curves_csv(path, curves) -> None:
    rows = [["n", "measure", "ari", "disparity"]]
    for curve in curves:
        for n, ari, disp in zip(curve.n_values, curve.ari, curve.disparity):
            rows.append([int(n), curve.measure, _fmt(ari), _fmt(disp)])
    write_text_atomic(path, _csv_text(rows))


def write_histogram_csv(path, centers, counts) -> None:
    rows = [["bin_center", "count"]]
    for c, n in zip(centers, counts):
        rows.append([_fmt(c), int(n)])
    write_text_atomic(path, _csv_text(rows))


# -- grayscale rendering --------------------------------------------------------

def render_pgm(values: np.ndarray) -> bytes:
    """Binary 8-bit graymap with one pixel per matrix entry.

    Values are clamped to [-1, 1] and mapped linearly onto [0, 255] with a
    floor, so 0 maps to pixel 127 and the extremes hit 0 and 255 exactly.
    """
    M = np.asarray(values, dtype=float)
    if M.ndim != 2:
        raise GridcorrError("image source must be a 2-d matrix")
    clipped = np.clip(M, -1.0, 1.0)
    pixels = np.floor((clipped + 1.0) / 2.0 * 255.0).astype(np.uint8)
    header = f"P5\n{M.shape[1]} {M.shape[0]}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5" or len(parts) < 4:
        raise GridcorrError("not a binary graymap")
    width, height = (int(x) for x in parts[1].split())
    maxval = int(parts[2])
    if maxval != 255:
        raise GridcorrError("expected 8-bit graymap")
    pixels = np.frombuffer(parts[3], dtype=np.uint8, count=width * height)
    return pixels.reshape(height, width)


# -- manifests -------------------------------------------------------------------

def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir, command: str, config: dict, paths) -> str:
    """Manifest of a command's outputs with content hashes; returns its path."""
    entries = []
    for path in sorted(paths):
        rel = os.path.relpath(path, out_dir)
        entries.append({
            "path": rel,
            "sha256": sha256_file(path),
            "bytes": os.path.getsize(path),
        })
    manifest = {"command": command, "config": config, "outputs": entries}
    manifest_path = os.path.join(out_dir, "manifest.json")
    write_text_atomic(manifest_path, json.dumps(manifest, sort_keys=True, indent=2))
    return manifest_path
