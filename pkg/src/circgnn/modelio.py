"""JSON serialization of model configs and weights.

A weight entry is a single object {rows, cols, block_size, defining_vectors}
with the vectors flattened row-major over (block_row, block_col, offset).
block_size == 1 is the dense sentinel: every block is 1x1, so the payload is
simply the dense matrix row-major.  Plain vectors (biases, attention scoring
vectors) use the same shape with cols == 1 and block_size == 1.
"""

from __future__ import annotations

import json

import numpy as np

from .circulant import BlockCirculantMatrix, _block_counts
from .errors import InputParseError, SchemaError
from .gnn import GnnModelConfig, LayerWeights, Variant

_MATRIX_KEYS = ("W", "W_pool", "W_H", "W_C")


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputParseError(f"{path}: invalid JSON: {exc}") from exc


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise SchemaError(f"{context}: missing field {key!r}")
    return doc[key]


def load_model_config(path) -> GnnModelConfig:
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: model config must be an object")
    ctx = str(path)
    try:
        return GnnModelConfig(
            variant=_require(doc, "variant", ctx),
            dims=_require(doc, "dims", ctx),
            sample_sizes=_require(doc, "sample_sizes", ctx),
            block_size=doc.get("block_size", 1),
            gat_heads=doc.get("gat_heads", 1),
            gat_head_dim=doc.get("gat_head_dim", 0),
        )
    except ValueError as exc:  # unknown Variant value
        raise SchemaError(f"{ctx}: {exc}") from exc


def save_model_config(config: GnnModelConfig, path) -> None:
    doc = {
        "variant": config.variant.value,
        "dims": [list(d) for d in config.dims],
        "sample_sizes": list(config.sample_sizes),
        "block_size": config.block_size,
    }
    if config.variant is Variant.GAT:
        doc["gat_heads"] = config.gat_heads
        doc["gat_head_dim"] = config.gat_head_dim
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def weight_entry(weight) -> dict:
    """Serialize a dense array, vector, or block-circulant matrix."""
    if isinstance(weight, BlockCirculantMatrix):
        return {
            "rows": weight.rows,
            "cols": weight.cols,
            "block_size": weight.block_size,
            "defining_vectors": weight.defining_vectors.ravel().tolist(),
        }
    arr = np.asarray(weight, dtype=np.float64)
    if arr.ndim == 1:
        return {
            "rows": int(arr.shape[0]),
            "cols": 1,
            "block_size": 1,
            "defining_vectors": arr.tolist(),
        }
    if arr.ndim != 2:
        raise SchemaError(f"cannot serialize weight of ndim {arr.ndim}")
    return {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "block_size": 1,
        "defining_vectors": arr.ravel().tolist(),
    }


def parse_weight_entry(doc: dict, context: str, as_vector: bool = False):
    """Inverse of :func:`weight_entry`; block_size 1 loads as a dense array."""
    if not isinstance(doc, dict):
        raise SchemaError(f"{context}: weight entry must be an object")
    rows = int(_require(doc, "rows", context))
    cols = int(_require(doc, "cols", context))
    n = int(_require(doc, "block_size", context))
    flat = np.asarray(_require(doc, "defining_vectors", context), dtype=np.float64)
    if rows < 1 or cols < 1 or n < 1:
        raise SchemaError(f"{context}: rows, cols and block_size must be positive")
    if n == 1:
        if flat.size != rows * cols:
            raise SchemaError(
                f"{context}: expected {rows * cols} dense values, got {flat.size}"
            )
        dense = flat.reshape(rows, cols)
        if as_vector:
            if cols != 1:
                raise SchemaError(f"{context}: expected a vector, got {rows}x{cols}")
            return dense[:, 0]
        return dense
    if as_vector:
        raise SchemaError(f"{context}: vectors must be stored dense (block_size 1)")
    p, q = _block_counts(rows, cols, n)
    if flat.size != p * q * n:
        raise SchemaError(
            f"{context}: expected {p * q * n} defining values for "
            f"{rows}x{cols} at block size {n}, got {flat.size}"
        )
    return BlockCirculantMatrix(rows, cols, n, flat.reshape(p, q, n))


def save_weights(layers: list[LayerWeights], path) -> None:
    out = []
    for lw in layers:
        entry: dict = {}
        for key in _MATRIX_KEYS:
            w = getattr(lw, key)
            if w is not None:
                entry[key] = weight_entry(w)
        if lw.b is not None:
            entry["b"] = weight_entry(lw.b)
        if lw.W_att is not None:
            entry["W_att"] = [weight_entry(w) for w in lw.W_att]
        if lw.a_att is not None:
            entry["a_att"] = [weight_entry(a) for a in lw.a_att]
        out.append(entry)
    with open(path, "w") as fh:
        json.dump({"layers": out}, fh)


def load_weights(path) -> list[LayerWeights]:
    doc = _read_json(path)
    if not isinstance(doc, dict) or "layers" not in doc:
        raise SchemaError(f"{path}: weight file must be an object with a 'layers' list")
    layers = []
    for k, entry in enumerate(doc["layers"]):
        ctx = f"{path}: layer {k}"
        if not isinstance(entry, dict) or "W" not in entry:
            raise SchemaError(f"{ctx}: missing combination weight W")
        kw: dict = {"W": parse_weight_entry(entry["W"], f"{ctx}: W")}
        for key in ("W_pool", "W_H", "W_C"):
            if key in entry:
                kw[key] = parse_weight_entry(entry[key], f"{ctx}: {key}")
        if "b" in entry:
            kw["b"] = parse_weight_entry(entry["b"], f"{ctx}: b", as_vector=True)
        if "W_att" in entry:
            kw["W_att"] = [
                parse_weight_entry(w, f"{ctx}: W_att[{i}]")
                for i, w in enumerate(entry["W_att"])
            ]
        if "a_att" in entry:
            kw["a_att"] = [
                parse_weight_entry(a, f"{ctx}: a_att[{i}]", as_vector=True)
                for i, a in enumerate(entry["a_att"])
            ]
        layers.append(LayerWeights(**kw))
    return layers
