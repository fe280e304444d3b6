"""Versioned JSON file formats: configs, checkpoints, edge-probability matrices, reports.

Non-finite floats are never written as bare ``NaN``/``Infinity`` tokens: they
become the sentinel strings below, and readers of numeric payloads reject them.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .gcn import GcnModel
from .graph import num_nodes_for, vec_to_matrix, matrix_to_vec

CHECKPOINT_FORMAT = "graphmi-gcn-checkpoint/1"
PROBS_FORMAT = "graphmi-edge-probs/1"
REPORT_FORMAT = "graphmi-report/1"
SENTINELS = {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}


class FormatError(ValueError):
    pass


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj, path) -> None:
    text = json.dumps(to_jsonable(obj), indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def _reject_constant(token):
    raise FormatError(f"bare non-finite token {token!r} is not allowed")


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(), parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def finite_array(values, what: str) -> np.ndarray:
    """Numeric payload check: sentinel strings or non-numbers are rejected."""
    try:
        arr = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise FormatError(f"{what}: contains non-numeric entries (sentinels are rejected)") from None
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{what}: contains non-finite values")
    return arr


def _expect_format(doc: dict, fmt: str, path) -> None:
    if doc.get("format") != fmt:
        raise FormatError(f"{path}: expected format {fmt!r}, found {doc.get('format')!r}")


def save_checkpoint(model: GcnModel, path, config: dict | None = None) -> None:
    dump_json({
        "format": CHECKPOINT_FORMAT,
        "architecture": "gcn-2layer",
        "w0": {"shape": list(model.w0.shape), "values": model.w0.ravel().tolist()},
        "w1": {"shape": list(model.w1.shape), "values": model.w1.ravel().tolist()},
        "hidden_dim": model.hidden_dim,
        "num_classes": model.num_classes,
        "train_meta": model.train_meta,
        "config": config or {},
    }, path)


def _matrix(doc: dict, key: str, path) -> np.ndarray:
    try:
        shape = tuple(int(v) for v in doc[key]["shape"])
        values = finite_array(doc[key]["values"], f"{path}:{key}")
        return values.reshape(shape)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: malformed {key} ({exc})") from None


def load_checkpoint(path) -> GcnModel:
    doc = load_json(path)
    _expect_format(doc, CHECKPOINT_FORMAT, path)
    return GcnModel(_matrix(doc, "w0", path), _matrix(doc, "w1", path), doc.get("train_meta", {}))


def save_probs(P: np.ndarray, path, config: dict | None = None) -> None:
    """Store the upper triangle of a symmetric score matrix in adjacency-vector order."""
    P = np.asarray(P, dtype=float)
    sym = (P + P.T) / 2
    np.fill_diagonal(sym, 0.0)
    dump_json({"format": PROBS_FORMAT, "num_nodes": P.shape[0],
               "values": matrix_to_vec(sym).tolist(), "config": config or {}}, path)


def load_probs(path) -> np.ndarray:
    doc = load_json(path)
    _expect_format(doc, PROBS_FORMAT, path)
    values = finite_array(doc.get("values", []), f"{path}:values")
    if num_nodes_for(values.size) != doc.get("num_nodes"):
        raise FormatError(f"{path}: {values.size} values do not match num_nodes={doc.get('num_nodes')}")
    return vec_to_matrix(values, int(doc["num_nodes"]))


def save_report(report: dict, path) -> None:
    dump_json({"format": REPORT_FORMAT, **report}, path)


def load_report(path) -> dict:
    doc = load_json(path)
    _expect_format(doc, REPORT_FORMAT, path)
    return doc


def _cell(v):
    v = to_jsonable(v)
    return v if not isinstance(v, float) else repr(v)


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
