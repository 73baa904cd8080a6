"""False rejections of the topic-count tests on shock-free cohorts across seeds."""

import argparse

from egoshift.config import PipelineConfig
from egoshift.ingest import with_periods
from egoshift.pipeline import compute_cohort, compute_topics
from egoshift.stats import H0_MINUS, H0_PLUS, MetricSeries, lockdown_report
from egoshift.synth import generate_cohort, null_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=500)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--alpha", type=float, default=0.05)
    args = ap.parse_args()
    cfg = PipelineConfig()
    n_periods = len(cfg.period_schedule)
    key = {((3, 4, 5), H0_MINUS), ((4, 5, 6), H0_PLUS)}
    tot_key = tot_all = n_tests = 0
    for seed in range(args.seeds):
        frame, _ = generate_cohort(null_scenario(args.users, seed=seed), cfg.period_schedule)
        fp = with_periods(frame, cfg.period_schedule)
        users, _ = compute_cohort(fp, cfg)
        topics = compute_topics(fp, users)
        wide = topics.pivot(index="ego", columns="period", values="unique_count").reindex(index=users, columns=range(n_periods)).fillna(0)
        rep = lockdown_report([MetricSeries("unique_topics", wide)], alphas={"topics": args.alpha})
        rej = {(r.triple, r.hypothesis) for r in rep.rows if r.outcome == "REJECTED"}
        n_tests += len(rep.rows)
        tot_key += len(rej & key)
        tot_all += len(rej)
        print(f"seed {seed:>3}: {sorted(rej)}")
    print(f"shock tests: {tot_key}/{2 * args.seeds} rejected; all tests: {tot_all}/{n_tests} ({tot_all / n_tests:.1%})")


if __name__ == "__main__":
    main()
