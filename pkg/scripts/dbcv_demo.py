"""DBCV on a few toy layouts, full and proportionally sampled."""

import argparse

import numpy as np

from egoshift.dbcv import LabeledPointSet, dbcv_score, proportional_sample


def layouts(rng):
    yield "two far blobs", np.vstack([rng.normal(0, 0.1, (200, 2)), rng.normal(20, 0.1, (200, 2))]), np.repeat([0, 1], 200)
    yield "touching blobs", np.vstack([rng.normal(0, 1, (200, 2)), rng.normal(2, 1, (200, 2))]), np.repeat([0, 1], 200)
    blob = rng.normal(0, 1, (400, 2))
    yield "one blob split at random", blob, rng.integers(0, 2, 400)
    pts = np.vstack([rng.normal(0, 0.2, (300, 2)), rng.normal(6, 0.2, (60, 2)), rng.uniform(-3, 9, (40, 2))])
    yield "two blobs plus noise", pts, np.concatenate([np.zeros(300, int), np.ones(60, int), -np.ones(40, int)])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sample", type=int, default=100)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    for name, pts, labels in layouts(rng):
        data = LabeledPointSet(pts, labels)
        full = dbcv_score(data)
        sub = dbcv_score(proportional_sample(data, args.sample, seed=args.seed))
        print(f"{name:>26}: full {full.overall:+.3f}  sampled({args.sample}) {sub.overall:+.3f}  noise {full.noise_fraction:.0%}")


if __name__ == "__main__":
    main()
