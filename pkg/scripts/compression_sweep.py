"""Projection error and output drift across block sizes.

Draws a random dense model, projects its weights to block-circulant form at
each block size, and measures (a) the relative Frobenius error of the
projection and (b) how far inference outputs move on a synthetic graph.
Storage shrinks by n; the question this script answers is what that costs.
"""

import argparse

import numpy as np

from circgnn import (
    GnnModel,
    GnnModelConfig,
    LayerWeights,
    compression_stats,
    forward,
    project_to_block_circulant,
    random_weights,
    synthetic_graph,
    to_dense,
)


def project_layers(layers, block_size):
    out = []
    for lw in layers:
        kw = {"W": project_to_block_circulant(np.asarray(lw.W), block_size)}
        for name in ("W_pool", "W_H", "W_C"):
            w = getattr(lw, name)
            if w is not None:
                kw[name] = project_to_block_circulant(np.asarray(w), block_size)
        if lw.b is not None:
            kw["b"] = lw.b
        out.append(LayerWeights(**kw))
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--variant", default="gspool", choices=["gcn", "gspool", "ggcn"])
    ap.add_argument("--dim", type=int, default=64)
    ap.add_argument("--nodes", type=int, default=50)
    ap.add_argument("--block-sizes", type=int, nargs="+", default=[2, 4, 8, 16, 32])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = GnnModelConfig(
        args.variant, dims=((args.dim, args.dim), (args.dim, args.dim)),
        sample_sizes=(5, 3), block_size=1,
    )
    dense_layers = random_weights(cfg, seed=args.seed)
    g = synthetic_graph(args.nodes, avg_degree=6.0, feature_dim=args.dim, seed=args.seed)
    batch = list(range(args.nodes))
    baseline = forward(GnnModel(cfg, dense_layers), g, batch, seed=args.seed)
    base_norm = float(np.linalg.norm(baseline))

    print(f"{args.variant}, dim {args.dim}, {args.nodes} nodes")
    print(f"{'n':>4} {'storage':>8} {'weight err':>11} {'output drift':>13}")
    for n in args.block_sizes:
        proj = project_layers(dense_layers, n)
        werr = 0.0
        wnorm = 0.0
        for dl, pl in zip(dense_layers, proj):
            for name in ("W", "W_pool", "W_H", "W_C"):
                dw, pw = getattr(dl, name), getattr(pl, name)
                if dw is None:
                    continue
                werr += float(np.linalg.norm(np.asarray(dw) - to_dense(pw))) ** 2
                wnorm += float(np.linalg.norm(np.asarray(dw))) ** 2
        pcfg = GnnModelConfig(cfg.variant, cfg.dims, cfg.sample_sizes, block_size=n)
        out = forward(GnnModel(pcfg, proj), g, batch, seed=args.seed)
        drift = float(np.linalg.norm(out - baseline)) / base_norm
        sr = compression_stats(args.dim, args.dim, n).storage_reduction
        print(f"{n:>4} {sr:>7.0f}x {np.sqrt(werr / wnorm):>11.4f} {drift:>13.4f}")


if __name__ == "__main__":
    main()
