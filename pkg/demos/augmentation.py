"""Baseline SGD against permutation-augmented SGD on a small parity problem.

At this size the training set covers a small fraction of the cube, so the
two curves separate. The dimension is the optional first argument.
"""
import sys

from transinv.experiment import ExperimentConfig, aggregate, run_all

d = int(sys.argv[1]) if len(sys.argv) > 1 else 12
cfg = ExperimentConfig(d=d, train_size=300, test_size=500, steps=20000, width=128,
                       eval_interval=2000, seeds=(0, 1, 2))
rows = aggregate(run_all(cfg))
print(f"parity d={d}, {cfg.train_size} training points, {len(cfg.seeds)} seeds")
print(f"{'step':>6s}  {'baseline':>10s}  {'augmented':>10s}")
by = {(r.method, r.step): r for r in rows}
for step in sorted({r.step for r in rows}):
    b, a = by[("baseline", step)], by[("augmented", step)]
    print(f"{step:6d}  {b.mean_test_err:10.3f}  {a.mean_test_err:10.3f}")
