"""Reading and writing matrices, datasets and fit results.

Matrix CSV layout: a header line ``ncols=<n>`` followed by one line per row of
comma-separated values. Floats are written with 17 significant digits so every
double round-trips exactly. JSON goes through :mod:`json`, whose float repr
also round-trips exactly.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .model import Dataset, FitResult


def fmt(x):
    return format(float(x), ".17g")


def write_matrix_csv(path, M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InvalidArgumentError("only 2-D arrays can be written")
    lines = [f"ncols={M.shape[1]}"]
    lines.extend(",".join(fmt(v) for v in row) for row in M)
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path):
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("ncols="):
        raise InvalidArgumentError(f"{path}: missing 'ncols=' header")
    try:
        ncols = int(text[0].split("=", 1)[1])
    except ValueError as exc:
        raise InvalidArgumentError(f"{path}: bad header {text[0]!r}") from exc
    rows = []
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        vals = [float(v) for v in line.split(",")]
        if len(vals) != ncols:
            raise InvalidArgumentError(f"{path}:{lineno}: expected {ncols} values, got {len(vals)}")
        rows.append(vals)
    if not rows:
        raise InvalidArgumentError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def dataset_to_dict(d: Dataset):
    return {"X": d.X.tolist(), "Y": d.Y.tolist()}


def dataset_from_dict(data):
    try:
        return Dataset(np.asarray(data["X"], dtype=float), np.asarray(data["Y"], dtype=float))
    except KeyError as exc:
        raise InvalidArgumentError(f"dataset JSON lacks key {exc}") from exc


def load_dataset(x_path=None, y_path=None, json_path=None):
    """Load from a pair of matrix CSVs or from a ``{"X": ..., "Y": ...}`` JSON file."""
    if json_path is not None:
        return dataset_from_dict(read_json(json_path))
    if x_path is None or y_path is None:
        raise InvalidArgumentError("need both X and Y CSV paths, or a JSON dataset")
    return Dataset(read_matrix_csv(x_path), read_matrix_csv(y_path))


def save_dataset_json(path, d: Dataset):
    write_json(path, dataset_to_dict(d))


def write_result_json(path, result: FitResult):
    write_json(path, result.to_dict())


def read_result_json(path):
    return FitResult.from_dict(read_json(path))


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "objective", "seconds"])
        for k, f, s in trace:
            w.writerow([int(k), fmt(f), fmt(s)])


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(int(r["iter"]), float(r["objective"]), float(r["seconds"])) for r in rows]
