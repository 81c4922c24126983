"""
Fold plans, metrics and reports
===============================

Stratified folds keep the class ratio in every fold; leave-one-subject-out
folds flag subjects whose test side holds a single class.  Metrics are macro
averages over the classes present in each test fold.
"""

# %%
import numpy as np

from gaitctx.evaluation import (compute_metrics, make_loso_folds, make_stratified_folds,
                                MetricsReport)
from gaitctx.synthetic_data import TABLE_III_WINDOWS

# %% a 241/70 split dealt into five folds
y = np.array([1] * 241 + [0] * 70)
for _, test in make_stratified_folds(y, 5, seed=0).folds:
    print(len(test), "samples:", int((y[test] == 1).sum()), "indoor,",
          int((y[test] == 0).sum()), "outdoor")

# %% predicting the majority class everywhere sets the floor
floor = compute_metrics(y, np.ones_like(y))
print({k: round(floor[k], 3) for k in ("accuracy", "precision", "recall", "f1")})
print(floor["flags"])

# %% subject folds on a cohort shaped like the reference one
subjects = np.concatenate([[s] * (i + o) for s, (i, o) in TABLE_III_WINDOWS.items()])
labels = np.concatenate([[1] * i + [0] * o for i, o in TABLE_III_WINDOWS.values()])
plan = make_loso_folds(subjects, labels)
for name, (_, test), flag in zip(plan.names, plan.folds, plan.degenerate):
    print(f"subject {name}: {len(test):4d} windows{'  single class' if flag else ''}")

# %% reports are versioned JSON
report = MetricsReport("demo", {"model": "majority"}, [floor], {})
print(MetricsReport.from_json(report.to_json()).campaign_id)
