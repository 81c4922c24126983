"""
Feature-based versus raw-signal classifiers
===========================================

A small synthetic cohort is turned into two datasets: window-level mobility
outcomes for the tabular models and padded bout signals for the time series
models.  Both are cross-validated with the same stratified folds.
"""

# %%
from gaitctx.context_labeling import detect_staypoints, label_stream
from gaitctx.dmo_features import aggregate_all_windows, extract_basic_dmos, records_to_dataset
from gaitctx.evaluation import make_stratified_folds, render_table, run_campaign
from gaitctx.gait_segmentation import segment_stream
from gaitctx.synthetic_data import generate_scenario, uniform_config
from gaitctx.tsc import build_series_dataset

bouts = []
for sc in generate_scenario(uniform_config(3, 2400, 1200, seed=11)):
    sps = detect_staypoints(sc.gps, 10, 120, 60)
    labels = label_stream(sc.gps, sps, 15, 0.0, len(sc.truth))
    bouts += [b for b in segment_stream(sc.stream, labels)[1] if b.label is not None]
print(len(bouts), "labelled bouts")

# %% tabular models on window DMOs
windows = records_to_dataset(aggregate_all_windows([extract_basic_dmos(b) for b in bouts]))
plan = make_stratified_folds(windows.y, 5, seed=0)
reports = [run_campaign(windows, m, plan, "zscore", campaign_id=m)
           for m in ("majority", "gnb", "logistic", "knn", "ridge")]

# %% time series models on padded bout magnitude
series = build_series_dataset(bouts, "magnitude", length_mode="pad")
plan = make_stratified_folds(series.y, 5, seed=0)
for model, params in (("rocket", {"num_kernels": 2000}), ("minirocket", {}),
                      ("symbolic", {})):
    reports.append(run_campaign(series, model, plan, params=params, campaign_id=model))

# %%
print(render_table(reports))
