"""Sample-based GNN inference over dense or block-circulant weights.

Every layer splits into aggregation (pull a fixed-size neighbor sample into
one vector) and combination (one weight multiply plus a nonlinearity).
Four variants are supported:

  gcn     a_v = sum_u h_u / sqrt(deg(u) deg(v));      combine Relu(W a_v)
  gspool  a_v = elementwise-max_u Relu(W_pool h_u+b); combine Relu(W [a_v, h_v])
  ggcn    a_v = sum_u sigmoid(W_H h_u + W_C h_v)*h_u; combine Relu(W a_v)
  gat     per head: alpha = softmax_j LeakyRelu(att @ [W_att h_v, W_att h_j]),
          head output sum_j alpha_j h_j over the raw neighbor features,
          heads concatenated;                          combine Elu(W a_v)

Neighbor samples are drawn with replacement, GraphSAGE style, and the
per-node sample seed is derived from (batch seed, layer, node) so that any
execution order, including a threaded one, reproduces the same output.

Weight multiplies dispatch on type: a numpy array multiplies densely, a
BlockCirculantMatrix goes through the spectral path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .circulant import BlockCirculantMatrix, bc_matvec, new_random, to_dense
from .errors import SchemaError
from .graph import Graph, sample_neighbors


class Variant(str, Enum):
    GCN = "gcn"
    GS_POOL = "gspool"
    G_GCN = "ggcn"
    GAT = "gat"


_LEAKY_SLOPE = 0.2


def activation(kind: str, x):
    """Element-wise nonlinearity: relu, elu, sigmoid, exp, or leaky_relu."""
    x = np.asarray(x, dtype=np.float64)
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "elu":
        return np.where(x > 0, x, np.expm1(x))
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-x))
    if kind == "exp":
        return np.exp(x)
    if kind == "leaky_relu":
        return np.where(x > 0, x, _LEAKY_SLOPE * x)
    raise SchemaError(f"unknown activation {kind!r}")


def matvec(weight, x) -> np.ndarray:
    """Multiply by a weight that is either dense (ndarray) or block-circulant."""
    if isinstance(weight, BlockCirculantMatrix):
        return bc_matvec(weight.spectral(), x)
    weight = np.asarray(weight)
    x = np.asarray(x)
    if weight.ndim != 2 or weight.shape[1] != x.shape[0]:
        raise SchemaError(f"cannot multiply {weight.shape} by {x.shape}")
    return weight @ x


def _weight_shape(weight) -> tuple[int, int]:
    if isinstance(weight, BlockCirculantMatrix):
        return weight.shape
    return np.asarray(weight).shape


@dataclass(frozen=True)
class GnnModelConfig:
    """Model hyperparameters; dims[k] is the (input, output) pair of layer k."""

    variant: Variant
    dims: tuple[tuple[int, int], ...]
    sample_sizes: tuple[int, ...]
    block_size: int = 1  # 1 means dense weights
    gat_heads: int = 1
    gat_head_dim: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "dims", tuple(tuple(d) for d in self.dims))
        object.__setattr__(self, "sample_sizes", tuple(self.sample_sizes))
        if not self.dims:
            raise SchemaError("model needs at least one layer")
        if len(self.sample_sizes) != len(self.dims):
            raise SchemaError("need one sample size per layer")
        for k, (din, dout) in enumerate(self.dims):
            if din < 1 or dout < 1:
                raise SchemaError(f"layer {k}: dims must be positive")
            if k > 0 and din != self.dims[k - 1][1]:
                raise SchemaError(
                    f"layer {k}: input dim {din} != previous output {self.dims[k - 1][1]}"
                )
        if any(s < 1 for s in self.sample_sizes):
            raise SchemaError("sample sizes must be >= 1")
        if self.block_size < 1:
            raise SchemaError("block_size must be >= 1")
        if self.block_size > 1 and self.block_size & (self.block_size - 1):
            raise SchemaError("block_size must be a power of two")
        if self.variant is Variant.GAT:
            if self.gat_heads < 1 or self.gat_head_dim < 1:
                raise SchemaError("gat variant needs gat_heads >= 1 and gat_head_dim >= 1")

    @property
    def num_layers(self) -> int:
        return len(self.dims)


@dataclass
class LayerWeights:
    """Named weights of one layer; unused slots stay None.

    W is the combination weight for every variant.  gspool adds W_pool and
    bias b; ggcn adds the gate weights W_H (neighbor) and W_C (center); gat
    replaces aggregation weights with per-head attention projections W_att
    and scoring vectors a_att (the scoring vectors are always dense).
    """

    W: object
    W_pool: object = None
    b: np.ndarray | None = None
    W_H: object = None
    W_C: object = None
    W_att: list | None = None
    a_att: list[np.ndarray] | None = None


def _expect_shape(name: str, weight, shape: tuple[int, int], layer: int) -> None:
    if weight is None:
        raise SchemaError(f"layer {layer}: missing weight {name}")
    got = _weight_shape(weight)
    if tuple(got) != shape:
        raise SchemaError(f"layer {layer}: weight {name} has shape {got}, expected {shape}")


def validate_layer_weights(config: GnnModelConfig, layer: int, lw: LayerWeights) -> None:
    """Check that one layer's weights match the shapes the variant implies."""
    din, dout = config.dims[layer]
    v = config.variant
    if v is Variant.GCN:
        _expect_shape("W", lw.W, (dout, din), layer)
    elif v is Variant.GS_POOL:
        _expect_shape("W_pool", lw.W_pool, (din, din), layer)
        if lw.b is None or np.asarray(lw.b).shape != (din,):
            raise SchemaError(f"layer {layer}: pooling bias b must have shape ({din},)")
        _expect_shape("W", lw.W, (dout, 2 * din), layer)
    elif v is Variant.G_GCN:
        _expect_shape("W_H", lw.W_H, (din, din), layer)
        _expect_shape("W_C", lw.W_C, (din, din), layer)
        _expect_shape("W", lw.W, (dout, din), layer)
    elif v is Variant.GAT:
        if not lw.W_att or not lw.a_att or len(lw.W_att) != config.gat_heads or len(
            lw.a_att
        ) != config.gat_heads:
            raise SchemaError(f"layer {layer}: gat needs {config.gat_heads} heads of W_att/a_att")
        for i, (wa, aa) in enumerate(zip(lw.W_att, lw.a_att)):
            _expect_shape(f"W_att[{i}]", wa, (config.gat_head_dim, din), layer)
            if np.asarray(aa).shape != (2 * config.gat_head_dim,):
                raise SchemaError(
                    f"layer {layer}: a_att[{i}] must have shape ({2 * config.gat_head_dim},)"
                )
        _expect_shape("W", lw.W, (dout, config.gat_heads * din), layer)
    else:  # pragma: no cover
        raise SchemaError(f"unknown variant {v}")


@dataclass
class GnnModel:
    config: GnnModelConfig
    layers: list[LayerWeights]

    def __post_init__(self):
        if len(self.layers) != self.config.num_layers:
            raise SchemaError(
                f"model has {len(self.layers)} weight layers for "
                f"{self.config.num_layers} configured layers"
            )
        for k, lw in enumerate(self.layers):
            validate_layer_weights(self.config, k, lw)


def _make_weight(rows: int, cols: int, block_size: int, rng, dense: bool):
    bound = 1.0 / np.sqrt(cols)
    if block_size == 1 or dense:
        return rng.uniform(-bound, bound, size=(rows, cols))
    seed = int(rng.integers(0, 2**63 - 1))
    return new_random(rows, cols, block_size, seed)


def random_weights(
    config: GnnModelConfig, seed: int, dense_names: frozenset[str] | set[str] = frozenset()
) -> list[LayerWeights]:
    """Random weights for a config; names in dense_names stay uncompressed.

    The per-name dense override covers the variant where only aggregator
    weights are compressed and the combiner stays dense (or vice versa).
    """
    rng = np.random.default_rng(seed)
    n = config.block_size
    layers = []
    for din, dout in config.dims:
        v = config.variant
        lw = None
        if v is Variant.GCN:
            lw = LayerWeights(W=_make_weight(dout, din, n, rng, "W" in dense_names))
        elif v is Variant.GS_POOL:
            lw = LayerWeights(
                W=_make_weight(dout, 2 * din, n, rng, "W" in dense_names),
                W_pool=_make_weight(din, din, n, rng, "W_pool" in dense_names),
                b=rng.uniform(-1.0 / np.sqrt(din), 1.0 / np.sqrt(din), size=din),
            )
        elif v is Variant.G_GCN:
            lw = LayerWeights(
                W=_make_weight(dout, din, n, rng, "W" in dense_names),
                W_H=_make_weight(din, din, n, rng, "W_H" in dense_names),
                W_C=_make_weight(din, din, n, rng, "W_C" in dense_names),
            )
        elif v is Variant.GAT:
            hd = config.gat_head_dim
            lw = LayerWeights(
                W=_make_weight(dout, config.gat_heads * din, n, rng, "W" in dense_names),
                W_att=[
                    _make_weight(hd, din, n, rng, "W_att" in dense_names)
                    for _ in range(config.gat_heads)
                ],
                # attention scoring vectors are always dense
                a_att=[
                    rng.uniform(-1.0 / np.sqrt(2 * hd), 1.0 / np.sqrt(2 * hd), size=2 * hd)
                    for _ in range(config.gat_heads)
                ],
            )
        layers.append(lw)
    return layers


def _densify_one(weight):
    if isinstance(weight, BlockCirculantMatrix):
        return to_dense(weight)
    return weight


def densify_weights(layers: list[LayerWeights]) -> list[LayerWeights]:
    """Expand every compressed weight to its exactly-equivalent dense form."""
    out = []
    for lw in layers:
        out.append(
            LayerWeights(
                W=_densify_one(lw.W),
                W_pool=_densify_one(lw.W_pool),
                b=lw.b,
                W_H=_densify_one(lw.W_H),
                W_C=_densify_one(lw.W_C),
                W_att=None if lw.W_att is None else [_densify_one(w) for w in lw.W_att],
                a_att=lw.a_att,
            )
        )
    return out


# --- aggregation -----------------------------------------------------------


def aggregate_gcn(g: Graph, h, v: int, samples) -> np.ndarray:
    """Degree-normalized sum over the sample: sum_u h[u] / sqrt(deg(u) deg(v)).

    Degrees come from the full graph; zero degrees count as one so isolated
    nodes (which sample themselves) stay well defined.
    """
    dv = max(g.degree(v), 1)
    acc = None
    for u in samples:
        du = max(g.degree(int(u)), 1)
        term = np.asarray(h[int(u)], dtype=np.float64) / np.sqrt(du * dv)
        acc = term if acc is None else acc + term
    return acc


def aggregate_gspool(h_samples: np.ndarray, w_pool, b) -> np.ndarray:
    """Element-wise max over Relu(W_pool h_u + b); order independent."""
    h_samples = np.asarray(h_samples, dtype=np.float64)
    pooled = [activation("relu", matvec(w_pool, row) + b) for row in h_samples]
    return np.maximum.reduce(pooled)


def aggregate_ggcn(h_samples: np.ndarray, h_v, w_h, w_c) -> np.ndarray:
    """Gated sum: sum_u sigmoid(W_H h_u + W_C h_v) * h_u.

    The gate dimension equals the feature dimension, so the sigmoid output
    multiplies h_u element-wise.  W_C h_v does not depend on u and is
    computed once.
    """
    h_samples = np.asarray(h_samples, dtype=np.float64)
    center = matvec(w_c, np.asarray(h_v, dtype=np.float64))
    acc = None
    for row in h_samples:
        gate = activation("sigmoid", matvec(w_h, row) + center)
        if gate.shape != row.shape:
            raise SchemaError("ggcn gate dimension must equal the feature dimension")
        term = gate * row
        acc = term if acc is None else acc + term
    return acc


def aggregate_gat(h_samples: np.ndarray, h_v, lw: LayerWeights) -> np.ndarray:
    """Multi-head attention over the sample, heads concatenated.

    Scores use projected features, e_j = LeakyRelu(a @ [W_att h_v, W_att h_j]);
    the attention weights then mix the raw neighbor features h_j, and each
    head contributes a vector of the input width.
    """
    h_samples = np.asarray(h_samples, dtype=np.float64)
    h_v = np.asarray(h_v, dtype=np.float64)
    heads = []
    for w_att, a_att in zip(lw.W_att, lw.a_att):
        hd = a_att.shape[0] // 2
        proj_v = matvec(w_att, h_v)
        scores = np.empty(h_samples.shape[0])
        for j, row in enumerate(h_samples):
            proj_j = matvec(w_att, row)
            scores[j] = activation(
                "leaky_relu", a_att[:hd] @ proj_v + a_att[hd:] @ proj_j
            )
        weights = np.exp(scores - scores.max())
        alpha = weights / weights.sum()
        heads.append(alpha @ h_samples)
    return np.concatenate(heads)


def gat_attention(h_samples: np.ndarray, h_v, w_att, a_att) -> np.ndarray:
    """Attention coefficients of one head; rows of a batch sum to one."""
    h_samples = np.asarray(h_samples, dtype=np.float64)
    hd = a_att.shape[0] // 2
    proj_v = matvec(w_att, np.asarray(h_v, dtype=np.float64))
    scores = np.array(
        [
            activation("leaky_relu", a_att[:hd] @ proj_v + a_att[hd:] @ matvec(w_att, row))
            for row in h_samples
        ]
    )
    weights = np.exp(scores - scores.max())
    return weights / weights.sum()


# --- combination and the forward pass --------------------------------------


def combine(variant: Variant, a_v: np.ndarray, h_v: np.ndarray, w) -> np.ndarray:
    """Apply the combination weight and the variant's nonlinearity."""
    variant = Variant(variant)
    if variant is Variant.GS_POOL:
        x = np.concatenate([np.asarray(a_v, dtype=np.float64), np.asarray(h_v, dtype=np.float64)])
    else:
        x = np.asarray(a_v, dtype=np.float64)
    y = matvec(w, x)
    return activation("elu" if variant is Variant.GAT else "relu", y)


def derived_seed(seed: int, layer: int, node: int) -> int:
    """Stable per-(layer, node) sampling seed; independent of visit order."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(layer, node))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _node_repr(model: GnnModel, g: Graph, v: int, k: int, seed: int, memo: dict) -> np.ndarray:
    if k == 0:
        return g.features[v]
    key = (k, v)
    hit = memo.get(key)
    if hit is not None:
        return hit
    cfg = model.config
    lw = model.layers[k - 1]
    s_k = cfg.sample_sizes[k - 1]
    samples = sample_neighbors(g, v, s_k, derived_seed(seed, k, v))
    h_v = _node_repr(model, g, v, k - 1, seed, memo)
    h_samples = np.stack([_node_repr(model, g, int(u), k - 1, seed, memo) for u in samples])

    if cfg.variant is Variant.GCN:
        table = {int(u): h_samples[i] for i, u in enumerate(samples)}
        a_v = aggregate_gcn(g, table, v, samples)
    elif cfg.variant is Variant.GS_POOL:
        a_v = aggregate_gspool(h_samples, lw.W_pool, lw.b)
    elif cfg.variant is Variant.G_GCN:
        a_v = aggregate_ggcn(h_samples, h_v, lw.W_H, lw.W_C)
    else:
        a_v = aggregate_gat(h_samples, h_v, lw)

    out = combine(cfg.variant, a_v, h_v, lw.W)
    memo[key] = out
    return out


def forward(model: GnnModel, g: Graph, batch, seed: int, threads: int = 1) -> np.ndarray:
    """Embeddings of the batch nodes after all layers; shape (len(batch), out_dim).

    Deterministic for a fixed seed regardless of batch order or thread
    count, because sampling seeds depend only on (seed, layer, node).
    """
    batch = [int(v) for v in batch]
    cfg = model.config
    if g.feature_dim != cfg.dims[0][0]:
        raise SchemaError(
            f"graph features have dim {g.feature_dim}, model expects {cfg.dims[0][0]}"
        )
    for v in batch:
        if not 0 <= v < g.num_nodes:
            raise IndexError(f"batch node {v} out of range [0, {g.num_nodes})")
    k = cfg.num_layers
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        def run(v: int) -> np.ndarray:
            return _node_repr(model, g, v, k, seed, {})

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, batch))
    else:
        memo: dict = {}
        rows = [_node_repr(model, g, v, k, seed, memo) for v in batch]
    return np.stack(rows)
