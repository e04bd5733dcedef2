"""Feature matrix files: delimited text plus a binary lossless variant.

Text layout: ``# key=value`` metadata lines, a header row ``id,<category>,
...``, then one row per sentence with floats printed at 6 significant
digits. The binary variant reuses the EMBS container keyed by row id, with
column names carried in the meta area, for lossless handoff to probes.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .embedding import EmbeddingStore, load_embedding_store, write_embedding_store
from .errors import InputError


def _format_value(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".6g")


def write_features(path, categories: Sequence[str], rows: Sequence[Sequence],
                   ids: Sequence[str] | None = None, meta: dict | None = None) -> None:
    rows = list(rows)
    if ids is None:
        ids = [str(i) for i in range(len(rows))]
    if len(ids) != len(rows):
        raise InputError(f"{len(ids)} ids for {len(rows)} rows")
    lines = []
    for key in sorted(meta or {}):
        lines.append(f"# {key}={meta[key]}")
    lines.append(",".join(["id"] + list(categories)))
    for rid, row in zip(ids, rows):
        if len(row) != len(categories):
            raise InputError(f"row {rid!r} has {len(row)} values for {len(categories)} categories")
        lines.append(",".join([rid] + [_format_value(v) for v in row]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_features(path) -> tuple[dict, tuple[str, ...], list[str], np.ndarray]:
    """Returns (meta, category names, row ids, float64 matrix)."""
    meta: dict[str, str] = {}
    header: list[str] | None = None
    ids: list[str] = []
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
                continue
            cells = line.split(",")
            if header is None:
                if cells[0] != "id":
                    raise InputError(f"feature file header must start with 'id', got {cells[0]!r}")
                header = cells[1:]
                continue
            if len(cells) != len(header) + 1:
                raise InputError(
                    f"line {line_no}: {len(cells) - 1} values for {len(header)} categories"
                )
            ids.append(cells[0])
            try:
                rows.append([float(c) for c in cells[1:]])
            except ValueError as err:
                raise InputError(f"line {line_no}: {err}") from None
    if header is None:
        raise InputError("feature file has no header row")
    matrix = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(header))
    return meta, tuple(header), ids, matrix


def write_feature_matrix(path, categories: Sequence[str], rows, ids: Sequence[str] | None = None,
                         meta: dict | None = None) -> None:
    """Lossless binary feature matrix (EMBS container keyed by row id)."""
    matrix = np.asarray(rows, dtype=np.float32)
    if ids is None:
        ids = [str(i) for i in range(matrix.shape[0])]
    full_meta = dict(meta or {})
    full_meta["columns"] = json.dumps(list(categories), separators=(",", ":"))
    store = EmbeddingStore(len(categories), zip(ids, matrix), meta=full_meta)
    write_embedding_store(store, path)


def read_feature_matrix(path) -> tuple[dict, tuple[str, ...], list[str], np.ndarray]:
    store = load_embedding_store(path)
    meta = dict(store.meta)
    try:
        categories = tuple(json.loads(meta.pop("columns")))
    except (KeyError, json.JSONDecodeError):
        raise InputError("binary feature matrix is missing its columns meta record") from None
    if len(categories) != store.dim:
        raise InputError(f"{len(categories)} column names for dim {store.dim}")
    ids = list(store.keys())
    matrix = np.stack([store.get(k) for k in ids]).astype(np.float64) if ids else \
        np.empty((0, store.dim), dtype=np.float64)
    return meta, categories, ids, matrix
