import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaitctx.core_signal import InertialStream
from gaitctx.dmo_features import (DMO_NAMES, DmoRecord, ZScoreScaler, aggregate_window_dmos,
                                  extract_basic_dmos, import_dmo_table, records_to_dataset,
                                  step_features, write_dmo_table)
from gaitctx.errors import InvalidInput
from gaitctx.gait_segmentation import WalkingBout, chunk_windows

FS = 100.0


def bout_of(z):
    acc = np.zeros((6000, 3))
    acc[:len(z), 2] = z
    w = chunk_windows(InertialStream("1", FS, 0.0, acc), 60)[0]
    return WalkingBout(w, 0, len(z))


def test_perfect_two_hertz_sinusoid():
    t = np.arange(1000) / FS
    rec = extract_basic_dmos(bout_of(np.sin(2 * np.pi * 2 * t)))
    f = rec.features
    assert f["number_of_steps"] == 20
    assert f["cadence"] == pytest.approx(120)
    assert f["step_duration"] == pytest.approx(0.5)
    assert f["step_duration_asymmetry"] == pytest.approx(0, abs=1e-9)
    assert f["cadence"] * rec.duration_s / 60 == f["number_of_steps"]


def test_flat_signal_masks_interval_features():
    rec = extract_basic_dmos(bout_of(np.zeros(500)))
    assert rec.features["number_of_steps"] == 0
    assert not rec.available("step_duration") and not rec.available("step_duration_asymmetry")


def test_alternating_intervals_asymmetry():
    intervals = np.tile([0.45, 0.55], 10)
    steps = np.concatenate(([0.2], 0.2 + np.cumsum(intervals)))
    # Gaussian pulses at planted step instants
    t = np.arange(int((steps[-1] + 0.5) * FS)) / FS
    z = sum(np.exp(-0.5 * ((t - s) / 0.04) ** 2) for s in steps)
    rec = extract_basic_dmos(bout_of(z))
    odd, even = intervals[0::2], intervals[1::2]
    expected = abs(odd.mean() - even.mean()) / intervals.mean()
    assert rec.features["number_of_steps"] == len(steps)
    assert rec.features["step_duration_asymmetry"] == pytest.approx(expected, abs=1e-3)
    assert expected == pytest.approx(0.2)


@given(st.integers(0, 500), st.floats(1.0, 60.0))
def test_cadence_times_duration_is_step_count(n, duration):
    times = np.sort(np.random.default_rng(n).uniform(0, duration, n))
    f = step_features(times, duration)
    assert f["cadence"] * duration / 60 == pytest.approx(f["number_of_steps"], rel=1e-12)


def rec(widx, bidx, **features):
    return DmoRecord("1", widx, bidx, features, None, 1)


def test_window_aggregation_rules():
    agg = aggregate_window_dmos([rec(0, 0, number_of_steps=10, cadence=100),
                                 rec(0, 1, number_of_steps=14, cadence=120)])
    assert agg.features == {"number_of_steps": 24, "cadence": 110}
    single = rec(2, 0, number_of_steps=7, cadence=99.5, gait_speed=1.1)
    assert aggregate_window_dmos([single]).features == single.features
    triple = [rec(0, 0, gait_speed=1.0), rec(0, 1), rec(0, 2, gait_speed=1.4)]
    assert aggregate_window_dmos(triple).features["gait_speed"] == pytest.approx(1.2)
    with pytest.raises(InvalidInput):
        aggregate_window_dmos([])
    with pytest.raises(InvalidInput):
        aggregate_window_dmos([rec(0, 0), rec(1, 0)])


@given(st.lists(st.integers(0, 200), min_size=3, max_size=3))
def test_step_sum_is_associative(counts):
    recs = [rec(0, i, number_of_steps=float(c)) for i, c in enumerate(counts)]
    whole = aggregate_window_dmos(recs).features["number_of_steps"]
    first_two = aggregate_window_dmos(recs[:2]).features["number_of_steps"]
    assert whole == first_two + counts[2] == sum(counts)


def write_table(path, header, rows):
    path.write_text(",".join(header) + "\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))


def test_import_full_and_partial_tables(tmp_path):
    header = ["subject", "window_index", "bout_index"] + list(DMO_NAMES)
    write_table(tmp_path / "full.csv", header, [["1", 0, 0] + [0.5] * len(DMO_NAMES)])
    (r,) = import_dmo_table(tmp_path / "full.csv")
    assert all(r.mask.values())

    partial = [h for h in header if h != "gait_speed"]
    write_table(tmp_path / "part.csv", partial, [["1", 0, 0] + [0.5] * (len(partial) - 3)] * 2)
    assert not any(r.mask["gait_speed"] for r in import_dmo_table(tmp_path / "part.csv"))


def test_import_rejections(tmp_path):
    write_table(tmp_path / "neg.csv", ["subject", "window_index", "bout_index", "stride_length"],
                [["1", 0, 0, 1.2], ["1", 0, 1, -0.3]])
    with pytest.raises(InvalidInput, match="row 3.*stride_length"):
        import_dmo_table(tmp_path / "neg.csv")
    write_table(tmp_path / "unk.csv", ["subject", "window_index", "bout_index", "foot_angle"],
                [["1", 0, 0, 1]])
    with pytest.raises(InvalidInput, match="foot_angle"):
        import_dmo_table(tmp_path / "unk.csv")
    write_table(tmp_path / "txt.csv", ["subject", "window_index", "bout_index", "cadence"],
                [["1", 0, 0, "fast"]])
    with pytest.raises(InvalidInput, match="row 2, column 'cadence'"):
        import_dmo_table(tmp_path / "txt.csv")


def test_table_roundtrip(tmp_path):
    recs = [DmoRecord("1", 0, 0, {"cadence": 101.5, "number_of_steps": 12.0}, 7.0, 1),
            DmoRecord("2", 4, 1, {"cadence": 98.0}, 5.0, 0)]
    write_dmo_table(tmp_path / "t.csv", recs)
    back = import_dmo_table(tmp_path / "t.csv")
    assert [r.features for r in back] == [r.features for r in recs]
    assert [r.label for r in back] == [1, 0]


def test_zscore_scaler():
    s = ZScoreScaler().fit(np.array([[2.0], [4.0]]))
    assert s.transform(np.array([[2.0], [4.0]])).ravel().tolist() == [-1, 1]
    X = np.random.default_rng(0).normal(5, 3, size=(50, 19))
    sc = ZScoreScaler().fit(X)
    assert np.abs(sc.transform(X).mean(axis=0)).max() < 1e-12
    assert np.all(sc.transform(sc.mean_[None, :]) == 0)
    const = ZScoreScaler().fit(np.ones((4, 2)))
    assert np.all(const.transform(np.ones((2, 2))) == 0)


def test_records_to_dataset_masking():
    recs = [DmoRecord("1", i, 0, {"cadence": 100.0 + i, "gait_speed": 1.0}, None, i % 2)
            for i in range(4)]
    recs.append(DmoRecord("1", 9, 0, {"cadence": 90.0}, None, 1))   # missing gait_speed
    recs.append(DmoRecord("1", 10, 0, {"cadence": 90.0, "gait_speed": 1.0}, None, None))
    data = records_to_dataset(recs)
    assert data.feature_names == ["cadence", "gait_speed"]
    assert len(data) == 4
