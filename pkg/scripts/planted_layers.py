"""Ring recovery on planted layered frequency profiles, log versus raw clustering scale."""

import argparse

import numpy as np

from egoshift.egonet import mean_shift_rings
from egoshift.synth import planted_profile, profile_gap_ratio


def draw(rng, min_gap):
    while True:
        sizes = (rng.integers(2, 9), rng.integers(5, 16), rng.integers(15, 41), rng.integers(40, 121))
        centers = [rng.uniform(30, 120)]
        for r in rng.uniform(3, 5, 3):
            centers.append(centers[-1] / r)
        spread = rng.uniform(0.02, 0.1)
        if profile_gap_ratio(centers, spread) >= min_gap and min(centers) * (1 - spread) >= 1:
            return planted_profile(rng, sizes, centers, spread)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--egos", type=int, default=500)
    ap.add_argument("--seed", type=int, default=2020)
    ap.add_argument("--min-gap", type=float, default=5.0)
    args = ap.parse_args()
    for log_scale in (True, False):
        rng = np.random.default_rng(args.seed)
        hits = matched = total = 0
        counts = []
        for _ in range(args.egos):
            x, layer = draw(rng, args.min_gap)
            res = mean_shift_rings(x, log_scale=log_scale)
            counts.append(res.n_clusters)
            hits += res.n_clusters == 4
            matched += int((res.labels == layer).sum())
            total += layer.size
        print(
            f"{'log' if log_scale else 'raw'} scale: ring count {hits / args.egos:.1%}, "
            f"membership {matched / total:.2%}, rings found min/median/max "
            f"{min(counts)}/{int(np.median(counts))}/{max(counts)}"
        )


if __name__ == "__main__":
    main()
