from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaitctx.errors import InvalidInput
from gaitctx.evaluation import (FitAudit, MetricsReport, aggregate, check_plan, checksum_arrays,
                                compute_metrics, format_cell, make_custom_folds,
                                make_loso_folds, make_stratified_folds, render_table,
                                run_campaign)
from gaitctx.synthetic_data import TABLE_III_WINDOWS
from gaitctx.tabular_classifiers import TabularDataset
from gaitctx.tsc import SeriesDataset


def table_iii_labels():
    subjects, labels = [], []
    for sid, (ind, out) in TABLE_III_WINDOWS.items():
        subjects += [sid] * (ind + out)
        labels += [1] * ind + [0] * out
    return np.array(subjects), np.array(labels)


def test_stratified_folds_on_241_70():
    y = np.array([1] * 241 + [0] * 70)
    plan = make_stratified_folds(y, 5, seed=0)
    check_plan(plan)
    sizes = sorted(len(t) for _, t in plan.folds)
    assert sizes == [62, 62, 62, 62, 63]
    for _, test in plan.folds:
        assert (y[test] == 1).sum() in (48, 49)
        assert (y[test] == 0).sum() == 14


def test_stratified_small_examples():
    y = np.array([0, 1] * 5)
    for _, test in make_stratified_folds(y, 5, seed=3).folds:
        assert sorted(y[test].tolist()) == [0, 1]
    with pytest.raises(InvalidInput):
        make_stratified_folds([0, 0, 0, 1, 1, 1, 1, 1], 5)


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 60), st.integers(5, 60), st.integers(2, 5), st.integers(0, 99))
def test_stratified_proportions_and_determinism(n1, n0, k, seed):
    y = np.array([1] * n1 + [0] * n0)
    plan = make_stratified_folds(y, k, seed)
    check_plan(plan)
    for _, test in plan.folds:
        for c, n in ((1, n1), (0, n0)):
            assert abs((y[test] == c).sum() - n / k) < 1
    again = make_stratified_folds(y, k, seed)
    assert all(np.array_equal(a[1], b[1]) for a, b in zip(plan.folds, again.folds))


def test_loso_on_table_iii_shape():
    subjects, labels = table_iii_labels()
    assert (labels == 1).sum() == 805 and (labels == 0).sum() == 270
    plan = make_loso_folds(subjects, labels)
    check_plan(plan, subjects)
    assert len(plan) == 9 and plan.names == [str(i) for i in range(1, 10)]
    flagged = {n for n, d in zip(plan.names, plan.degenerate) if d}
    assert "3" in flagged
    single_class = {s for s, (i, o) in TABLE_III_WINDOWS.items() if i == 0 or o == 0}
    assert flagged == single_class
    for train, test in plan.folds:
        assert not set(subjects[train]) & set(subjects[test])
    with pytest.raises(InvalidInput):
        make_loso_folds(["1", "1"])


def test_custom_folds_must_partition():
    assert len(make_custom_folds([[0, 2], [1, 3]], 4)) == 2
    with pytest.raises(InvalidInput):
        make_custom_folds([[0, 1], [1, 2]], 3)


def test_majority_floor_on_241_70():
    y = np.array([1] * 241 + [0] * 70)
    m = compute_metrics(y, np.ones_like(y))
    assert m["accuracy"] == pytest.approx(0.775, abs=1e-3)
    assert m["precision"] == pytest.approx(0.387, abs=1e-3)
    assert m["recall"] == pytest.approx(0.500, abs=1e-3)
    assert m["f1"] == pytest.approx(0.436, abs=1e-3)
    assert any("never predicted" in f for f in m["flags"])


def test_perfect_predictions():
    y = np.array([0, 1, 1, 0])
    m = compute_metrics(y, y)
    assert [m[k] for k in ("accuracy", "precision", "recall", "f1")] == [1.0] * 4


def test_hand_confusion_matrix():
    # positive class 1: TP=8 FP=2 FN=1 TN=9
    y_true = np.array([1] * 8 + [0] * 2 + [1] * 1 + [0] * 9)
    y_pred = np.array([1] * 8 + [1] * 2 + [0] * 1 + [0] * 9)
    m = compute_metrics(y_true, y_pred)
    assert m["confusion"] == [[9, 2], [1, 8]]
    p1, r1 = Fraction(8, 10), Fraction(8, 9)
    p0, r0 = Fraction(9, 10), Fraction(9, 11)
    f = lambda p, r: 2 * p * r / (p + r)
    assert m["accuracy"] == 17 / 20
    assert m["precision"] == pytest.approx(float((p0 + p1) / 2), abs=1e-15)
    assert m["recall"] == pytest.approx(float((r0 + r1) / 2), abs=1e-15)
    assert m["f1"] == pytest.approx(float((f(p0, r0) + f(p1, r1)) / 2), abs=1e-15)


@given(st.integers(1, 500), st.integers(1, 500))
def test_constant_predictor_closed_form(n1, n2):
    y = np.array([1] * n1 + [0] * n2)
    m = compute_metrics(y, np.ones_like(y))
    assert m["f1"] == pytest.approx(n1 / (2 * n1 + n2), rel=1e-12)
    assert m["recall"] == 0.5


def test_metric_errors():
    with pytest.raises(InvalidInput):
        compute_metrics([0, 1], [0])
    with pytest.raises(InvalidInput):
        compute_metrics([], [])


def test_single_class_fold_excludes_absent_class():
    m = compute_metrics([0, 0, 0, 0], [0, 1, 0, 0])
    assert m["recall"] == 0.75 and m["precision"] == 1.0
    assert any("absent" in f for f in m["flags"])


def test_aggregate_recomputes_from_folds():
    folds = [{"accuracy": a, "precision": a, "recall": a, "f1": a} for a in (0.5, 0.7, 0.9)]
    agg = aggregate(folds)
    assert agg["f1"]["mean"] == pytest.approx(0.7)
    assert agg["f1"]["std"] == pytest.approx(np.sqrt(((0.2 ** 2) * 2) / 3))
    assert format_cell(0.7231, 0.093) == "72.3 ± 9.3"


def blob_dataset(n=60, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(size=(n, 3)) + 3 * y[:, None]
    return TabularDataset(X, y, (np.arange(n) % 3).astype(str), ["a", "b", "c"])


def test_campaign_report_roundtrip(tmp_path):
    data = blob_dataset()
    plan = make_stratified_folds(data.y, 5, seed=1)
    rep = run_campaign(data, "gnb", plan, "zscore", campaign_id="gnb-test")
    assert rep.aggregate["accuracy"]["mean"] > 0.9
    values = [f["f1"] for f in rep.folds]
    assert rep.aggregate["f1"]["mean"] == float(np.mean(values))
    assert rep.aggregate["f1"]["std"] == float(np.std(values))
    rep.save(tmp_path / "r.json")
    back = MetricsReport.load(tmp_path / "r.json")
    assert back.to_json() == rep.to_json()
    assert back.config["normalization"] == "zscore"
    table = render_table([rep, back])
    assert table.count("\n") == 3 and "±" in table


def test_report_schema_checks():
    with pytest.raises(InvalidInput, match="schema_version"):
        MetricsReport.from_json('{"schema_version": 99}')


def test_same_seed_gives_identical_reports():
    data = blob_dataset()
    a = run_campaign(data, "logistic", make_stratified_folds(data.y, 5, seed=4))
    b = run_campaign(data, "logistic", make_stratified_folds(data.y, 5, seed=4))
    assert a.to_json() == b.to_json()


def test_audit_sees_only_training_rows():
    data = blob_dataset()
    plan = make_stratified_folds(data.y, 5, seed=2)
    audit = FitAudit()
    run_campaign(data, "knn", plan, "zscore", audit=audit)
    for rec, (train, _) in zip(audit.records, plan.folds):
        assert np.array_equal(rec["train_idx"], train)
    # corrupting fold 0's test rows must leave that fold's training inputs unchanged
    X = data.X.copy()
    X[plan.folds[0][1]] = 1e6
    audit2 = FitAudit()
    run_campaign(data.with_X(X), "knn", plan, "zscore", audit=audit2)
    assert audit2.records[0]["digest"] == audit.records[0]["digest"]
    assert audit2.records[1]["digest"] != audit.records[1]["digest"]


def test_audit_on_series_models():
    rng = np.random.default_rng(0)
    series = [rng.normal(size=40) for _ in range(20)]
    data = SeriesDataset(series, np.arange(20) % 2, np.zeros(20))
    plan = make_stratified_folds(data.y, 4, seed=0)
    audit = FitAudit()
    run_campaign(data, "dtw", plan, audit=audit)
    for rec, (train, _) in zip(audit.records, plan.folds):
        assert rec["digest"] == checksum_arrays([series[i] for i in train], data.y[train])


def test_incompatible_pairings():
    data = blob_dataset()
    plan = make_stratified_folds(data.y, 5)
    with pytest.raises(InvalidInput):
        run_campaign(data, "rocket", plan)
    variable = SeriesDataset([np.zeros(10), np.ones(12)] * 5, np.arange(10) % 2,
                             np.zeros(10), "variable")
    with pytest.raises(InvalidInput, match="equal-length"):
        run_campaign(variable, "minirocket", make_stratified_folds(variable.y, 5))
    with pytest.raises(InvalidInput):
        run_campaign(variable, "gnb", make_stratified_folds(variable.y, 5))
    with pytest.raises(InvalidInput):
        run_campaign(data, "svm", plan)
