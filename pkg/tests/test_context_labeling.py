import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaitctx.context_labeling import (EARTH_RADIUS_M, ContextLabelStream, GpsTrack,
                                      detect_staypoints, haversine_m, label_stream,
                                      read_gps_csv, read_label_csv, write_gps_csv,
                                      write_label_csv)
from gaitctx.errors import InvalidInput

LAT0, LON0 = 45.0, 7.0


def offset(north, east):
    lat = LAT0 + np.degrees(np.asarray(north, float) / EARTH_RADIUS_M)
    lon = LON0 + np.degrees(np.asarray(east, float) / (EARTH_RADIUS_M * math.cos(math.radians(LAT0))))
    return lat, lon


def track(t, north, east, sid="1"):
    lat, lon = offset(north, east)
    return GpsTrack(sid, np.asarray(t, float), lat, lon)


def test_haversine_known_values():
    # one degree of latitude on the sphere
    assert haversine_m(0, 0, 1, 0) == pytest.approx(EARTH_RADIUS_M * math.pi / 180)
    assert haversine_m(LAT0, LON0, LAT0, LON0) == 0


def test_single_location_gives_one_staypoint():
    t = np.linspace(0, 600, 10)
    tr = GpsTrack("1", t, np.full(10, LAT0), np.full(10, LON0))
    sps = detect_staypoints(tr, 50, 300, 100)
    assert len(sps) == 1 and sps[0].source == "cluster"
    assert sps[0].centroid == pytest.approx((LAT0, LON0))


def test_straight_walk_has_no_staypoints():
    t = np.arange(20) * 60.0
    tr = track(t, np.arange(20) * 100.0, np.zeros(20))
    assert detect_staypoints(tr, 50, 300, 120) == []


def test_short_track_returns_empty():
    assert detect_staypoints(track([0.0], [0], [0])) == []


def brute_force_runs(tr, dist, min_time, gap):
    """Maximal qualifying runs by trying every start, same greedy centroid rule."""
    n = len(tr)
    out, i = [], 0
    seg_break = [k for k in range(n - 1) if tr.t[k + 1] - tr.t[k] > gap]
    while i < n:
        stop = min([k + 1 for k in seg_break if k >= i] + [n])
        j = i + 1
        while j < stop:
            c_lat, c_lon = tr.lat[i:j].mean(), tr.lon[i:j].mean()
            if haversine_m(c_lat, c_lon, tr.lat[j], tr.lon[j]) > dist:
                break
            j += 1
        if tr.t[j - 1] - tr.t[i] >= min_time:
            out.append((tr.t[i], tr.t[j - 1]))
            i = j
        else:
            i += 1
    gaps = [(tr.t[k], tr.t[k + 1]) for k in seg_break]
    return out, gaps


def two_dwell_track():
    rng = np.random.default_rng(4)
    t1 = np.arange(0, 400.0, 10)
    transit = np.arange(400.0, 700, 10)
    t2 = np.arange(700.0, 1100, 10)
    t3 = np.arange(1220.0, 1300, 10)   # after a 120 s silent gap
    t = np.concatenate([t1, transit, t2, t3])
    north = np.concatenate([rng.normal(0, 2, len(t1)),
                            np.linspace(30, 870, len(transit)),
                            900 + rng.normal(0, 2, len(t2)),
                            900 + 1.5 * (t3 - 1220)])
    east = np.concatenate([rng.normal(0, 2, len(t1)), np.zeros(len(transit)),
                           rng.normal(0, 2, len(t2)), np.zeros(len(t3))])
    return track(t, north, east)


def test_two_dwells_and_a_gap_against_brute_force():
    tr = two_dwell_track()
    sps = detect_staypoints(tr, 50, 300, 60)
    clusters = [(s.t_start, s.t_end) for s in sps if s.source == "cluster"]
    gaps = [(s.t_start, s.t_end) for s in sps if s.source == "gps_gap"]
    assert len(clusters) == 2 and len(gaps) == 1
    ref_clusters, ref_gaps = brute_force_runs(tr, 50, 300, 60)
    assert clusters == ref_clusters and gaps == ref_gaps
    assert gaps == [(1090.0, 1220.0)]


@settings(max_examples=25, deadline=None)
@given(st.floats(-1e6, 1e6), st.integers(0, 1000))
def test_staypoints_invariant_under_time_shift(dt, seed):
    rng = np.random.default_rng(seed)
    n = 120
    t = np.cumsum(rng.choice([5.0, 10.0, 90.0], size=n, p=[0.5, 0.45, 0.05]))
    north = np.cumsum(rng.normal(0, 8, n))
    east = np.cumsum(rng.normal(0, 8, n))
    tr = track(t, north, east)
    a = detect_staypoints(tr, 40, 120, 60)
    b = detect_staypoints(tr.shifted(dt), 40, 120, 60)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert (x.lat, x.lon, x.source) == (y.lat, y.lon, y.source)
        assert y.t_start - x.t_start == pytest.approx(dt, abs=1e-6)
    # each gap staypoint matches one oversized reporting gap
    assert sum(s.source == "gps_gap" for s in a) == int((np.diff(t) > 60).sum())


def test_label_fully_indoor_and_outdoor():
    t = np.arange(0, 600.0)
    tr = GpsTrack("1", t, np.full(600, LAT0), np.full(600, LON0))
    sps = detect_staypoints(tr, 50, 300, 60)
    assert label_stream(tr, sps, 50).probs.tolist() == [1.0] * 600

    far = track(t, 1000 + t * 1.5, np.zeros(600))
    assert label_stream(far, sps, 50).probs.sum() == 0


def scalar_label(track_, staypoints, proximity, t0, n):
    out = []
    for k in range(n):
        s = t0 + k
        if s < track_.t[0] or s > track_.t[-1]:
            out.append(1.0)
            continue
        j = int(np.searchsorted(track_.t, s, side="right")) - 1
        j = min(j, len(track_) - 2)
        w = (s - track_.t[j]) / (track_.t[j + 1] - track_.t[j])
        lat = track_.lat[j] + w * (track_.lat[j + 1] - track_.lat[j])
        lon = track_.lon[j] + w * (track_.lon[j + 1] - track_.lon[j])
        v = 0.0
        for sp in staypoints:
            if sp.t_start <= s <= sp.t_end:
                if sp.source == "gps_gap" or haversine_m(lat, lon, sp.lat, sp.lon) <= proximity:
                    v = 1.0
        out.append(v)
    return np.array(out)


def test_one_hour_with_half_hour_dwell():
    rng = np.random.default_rng(2)
    t = np.arange(3600.0)
    dwell = (t >= 900) & (t < 2700)
    north = np.where(dwell, rng.normal(0, 1, 3600), 2000 + 1.4 * t)
    tr = track(t, north, rng.normal(0, 1, 3600))
    sps = detect_staypoints(tr, 20, 300, 60)
    labels = label_stream(tr, sps, 20, t0=0.0, duration_s=3600)
    assert int(labels.probs.sum()) == 1800
    np.testing.assert_array_equal(labels.probs, dwell.astype(float))
    np.testing.assert_array_equal(labels.probs, scalar_label(tr, sps, 20, 0.0, 3600))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_probabilities_are_binary_and_match_scalar_reference(seed):
    rng = np.random.default_rng(seed)
    n = 80
    t = np.cumsum(rng.choice([1.0, 20.0, 120.0], size=n, p=[0.6, 0.35, 0.05]))
    north = np.cumsum(rng.normal(0, 4, n))
    tr = track(t, north, np.cumsum(rng.normal(0, 4, n)))
    sps = detect_staypoints(tr, 25, 60, 60)
    t0 = float(np.floor(t[0])) - 5
    dur = int(t[-1] - t0) + 10
    labels = label_stream(tr, sps, 25, t0, dur)
    assert set(np.unique(labels.probs)) <= {0.0, 1.0}
    np.testing.assert_array_equal(labels.probs, scalar_label(tr, sps, 25, t0, dur))


def test_silent_seconds_are_indoor():
    tr = track([100.0, 101.0], [0, 1], [0, 0])
    labels = label_stream(tr, [], 50, t0=95.0, duration_s=10)
    assert labels.probs.tolist() == [1.0] * 5 + [0.0] * 2 + [1.0] * 3


def test_label_duration_must_be_positive():
    tr = track([0.0, 1.0], [0, 0], [0, 0])
    with pytest.raises(InvalidInput):
        label_stream(tr, [], 50, t0=0.0, duration_s=0)


def test_track_validation():
    with pytest.raises(InvalidInput):
        GpsTrack("1", np.array([0.0, 0.0]), np.array([1.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(InvalidInput):
        GpsTrack("1", np.array([0.0]), np.array([95.0]), np.array([1.0]))


def test_csv_roundtrips(tmp_path):
    tr = two_dwell_track()
    write_gps_csv(tmp_path / "gps_1.csv", tr)
    back = read_gps_csv(tmp_path / "gps_1.csv", "1")
    np.testing.assert_allclose(back.lat, tr.lat, atol=1e-7)
    labels = ContextLabelStream("1", 10.0, np.array([0.0, 1.0, 1.0]))
    write_label_csv(tmp_path / "labels_1.csv", labels)
    again = read_label_csv(tmp_path / "labels_1.csv", "1")
    assert again.t0 == 10.0 and again.probs.tolist() == [0.0, 1.0, 1.0]


def test_label_csv_requires_1hz(tmp_path):
    path = tmp_path / "labels.csv"
    path.write_text("t,p_indoor\n0,1\n2,1\n")
    with pytest.raises(InvalidInput, match="1 Hz"):
        read_label_csv(path)
