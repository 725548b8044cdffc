"""FLOP and intensity grid for every GNN variant on one dataset.

Prints the whole-graph aggregation/combination costs and marks which phases
sit below the memory-bound threshold.  With --block-size the last column
shows the FLOP count after block-circulant compression of the matvecs.
"""

import argparse

from circgnn import DATASET_STATS, Phase, compressed_flops, profile_grid


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dataset", default="reddit", choices=sorted(DATASET_STATS))
    ap.add_argument("--dim", type=int, default=512)
    ap.add_argument("--samples", type=int, default=25)
    ap.add_argument("--heads", type=int, default=2)
    ap.add_argument("--head-dim", type=int, default=128)
    ap.add_argument("--block-size", type=int, default=0)
    args = ap.parse_args()

    stats = DATASET_STATS[args.dataset]
    grid = profile_grid(
        stats, args.dim, args.dim, args.samples,
        heads=args.heads, head_dim=args.head_dim,
    )
    compressed = args.block_size > 1
    tail = f" {'compressed':>12}" if compressed else ""
    print(f"{args.dataset}: {stats.num_nodes:,} nodes, dim {args.dim}, S={args.samples}")
    print(f"{'variant':<8} {'phase':<12} {'gflops':>10} {'GB moved':>10} {'flops/B':>9}{tail}")
    for (variant, phase), prof in grid.items():
        row = (
            f"{variant.value:<8} {phase.value:<12}"
            f" {prof.flops / 1e9:>10.2f} {prof.bytes_moved / 1e9:>10.3f}"
            f" {prof.intensity:>9.2f}"
        )
        if compressed:
            c = compressed_flops(
                variant, phase, stats, args.dim, args.dim, args.samples,
                args.block_size, heads=args.heads, head_dim=args.head_dim,
            )
            row += f" {c / 1e9:>12.2f}"
        bound = "  <- memory bound" if prof.intensity is not None and prof.intensity < 10 else ""
        print(row + bound)


if __name__ == "__main__":
    main()
