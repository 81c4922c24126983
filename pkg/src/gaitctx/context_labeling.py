"""GPS staypoint detection and 1 Hz indoor-probability labels.

Staypoints come from two sources: spatio-temporal clusters of consecutive
fixes, and silent stretches where the phone stopped reporting positions.
A second is labelled indoor (1) when the subject is near a staypoint that
is active at that time, or when no position is known at all.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidInput

EARTH_RADIUS_M = 6_371_000.0

DEFAULT_DIST_THRESHOLD_M = 50.0
DEFAULT_TIME_THRESHOLD_S = 300.0
DEFAULT_GAP_THRESHOLD_S = 60.0
DEFAULT_PROXIMITY_M = 50.0

GPS_HEADER = ("t", "lat", "lon")
LABEL_HEADER = ("t", "p_indoor")


def haversine_m(lat1, lon1, lat2, lon2):
    """Great-circle distance in metres on a spherical Earth."""
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    a = (np.sin((lat2 - lat1) / 2) ** 2
         + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


@dataclass(frozen=True)
class GpsTrack:
    subject_id: str
    t: np.ndarray
    lat: np.ndarray
    lon: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        lat = np.asarray(self.lat, dtype=np.float64)
        lon = np.asarray(self.lon, dtype=np.float64)
        if not (t.shape == lat.shape == lon.shape) or t.ndim != 1:
            raise InvalidInput("t, lat and lon must be 1-D arrays of equal length")
        if len(t) > 1 and (np.diff(t) <= 0).any():
            raise InvalidInput("GPS timestamps must be strictly increasing")
        if (np.abs(lat) > 90).any() or (np.abs(lon) > 180).any():
            raise InvalidInput("latitude/longitude out of range")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)

    def __len__(self) -> int:
        return len(self.t)

    def shifted(self, dt: float) -> "GpsTrack":
        return GpsTrack(self.subject_id, self.t + dt, self.lat, self.lon)


@dataclass(frozen=True)
class Staypoint:
    lat: float
    lon: float
    t_start: float
    t_end: float
    source: str  # "cluster" or "gps_gap"

    @property
    def centroid(self) -> tuple[float, float]:
        return self.lat, self.lon


@dataclass(frozen=True)
class ContextLabelStream:
    """Per-second indoor probability starting at ``t0`` (1 = indoor)."""

    subject_id: str
    t0: float
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1:
            raise InvalidInput("probs must be 1-D")
        if ((probs < 0) | (probs > 1) | ~np.isfinite(probs)).any():
            raise InvalidInput("probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.probs)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.probs))


def _haversine_scalar(lat1, lon1, lat2, lon2) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    a = (math.sin((p2 - p1) / 2) ** 2
         + math.cos(p1) * math.cos(p2) * math.sin(math.radians(lon2 - lon1) / 2) ** 2)
    return 2 * EARTH_RADIUS_M * math.asin(math.sqrt(min(max(a, 0.0), 1.0)))


def _grow_run(track: GpsTrack, i: int, stop: int, dist_threshold_m: float) -> int:
    """End (exclusive) of the run starting at ``i`` whose points stay near
    the running centroid of the points already in the run."""
    lat, lon = track.lat, track.lon
    sum_lat, sum_lon, count = float(lat[i]), float(lon[i]), 1
    j = i + 1
    while j < stop:
        d = _haversine_scalar(sum_lat / count, sum_lon / count, lat[j], lon[j])
        if d > dist_threshold_m:
            break
        sum_lat += lat[j]
        sum_lon += lon[j]
        count += 1
        j += 1
    return j


def detect_staypoints(track: GpsTrack,
                      dist_threshold_m: float = DEFAULT_DIST_THRESHOLD_M,
                      time_threshold_s: float = DEFAULT_TIME_THRESHOLD_S,
                      gap_threshold_s: float = DEFAULT_GAP_THRESHOLD_S) -> list[Staypoint]:
    """Cluster and GPS-gap staypoints in chronological order.

    Runs are grown greedily from each candidate start point and never span
    a reporting gap longer than ``gap_threshold_s``; such a gap instead
    produces a ``gps_gap`` staypoint anchored at the last fix before it.
    """
    if min(dist_threshold_m, time_threshold_s, gap_threshold_s) <= 0:
        raise InvalidInput("thresholds must be positive")
    n = len(track)
    if n < 2:
        return []

    gaps = np.flatnonzero(np.diff(track.t) > gap_threshold_s)
    # segment boundaries: runs are confined to [seg_start, seg_end)
    bounds = np.concatenate(([0], gaps + 1, [n]))

    out: list[Staypoint] = []
    for seg_start, seg_end in zip(bounds[:-1], bounds[1:]):
        i = seg_start
        while i < seg_end:
            j = _grow_run(track, i, seg_end, dist_threshold_m)
            if track.t[j - 1] - track.t[i] >= time_threshold_s:
                out.append(Staypoint(float(track.lat[i:j].mean()), float(track.lon[i:j].mean()),
                                     float(track.t[i]), float(track.t[j - 1]), "cluster"))
                i = j
            else:
                i += 1
        if seg_end < n:
            k = seg_end - 1
            out.append(Staypoint(float(track.lat[k]), float(track.lon[k]),
                                 float(track.t[k]), float(track.t[k + 1]), "gps_gap"))
    out.sort(key=lambda sp: (sp.t_start, sp.t_end))
    return out


def interpolate_positions(track: GpsTrack, times: np.ndarray):
    """Linear lat/lon interpolation; NaN outside the track's time span."""
    times = np.asarray(times, dtype=np.float64)
    lat = np.full(times.shape, np.nan)
    lon = np.full(times.shape, np.nan)
    if len(track) == 0:
        return lat, lon
    inside = (times >= track.t[0]) & (times <= track.t[-1])
    lat[inside] = np.interp(times[inside], track.t, track.lat)
    lon[inside] = np.interp(times[inside], track.t, track.lon)
    return lat, lon


def label_stream(track: GpsTrack, staypoints: Sequence[Staypoint],
                 proximity_m: float = DEFAULT_PROXIMITY_M,
                 t0: float | None = None, duration_s: int | None = None) -> ContextLabelStream:
    """Indoor probability (0 or 1) for every second of ``[t0, t0 + duration_s)``.

    Defaults cover the track's own time span.
    """
    if t0 is None:
        if len(track) == 0:
            raise InvalidInput("t0 is required for an empty track")
        t0 = float(np.floor(track.t[0]))
    if duration_s is None:
        duration_s = int(np.ceil(track.t[-1] - t0)) + 1 if len(track) else 0
    if duration_s <= 0:
        raise InvalidInput("duration_s must be positive")

    times = t0 + np.arange(duration_s, dtype=np.float64)
    lat, lon = interpolate_positions(track, times)
    known = ~np.isnan(lat)

    probs = np.where(known, 0.0, 1.0)
    for sp in staypoints:
        active = (times >= sp.t_start) & (times <= sp.t_end)
        if sp.source == "gps_gap":
            probs[active] = 1.0
            continue
        sel = active & known & (probs == 0.0)
        if sel.any():
            near = haversine_m(lat[sel], lon[sel], sp.lat, sp.lon) <= proximity_m
            idx = np.flatnonzero(sel)[near]
            probs[idx] = 1.0
    return ContextLabelStream(track.subject_id, float(t0), probs)


def read_gps_csv(path, subject_id: str | None = None) -> GpsTrack:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != GPS_HEADER:
            raise InvalidInput(f"{path}: expected header {','.join(GPS_HEADER)}, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise InvalidInput(f"{path}: non-numeric value on row {lineno}") from None
            if len(row) != 3:
                raise InvalidInput(f"{path}: expected 3 columns on row {lineno}")
    data = np.asarray(rows, dtype=np.float64).reshape(-1, 3)
    return GpsTrack(subject_id or path.stem, data[:, 0], data[:, 1], data[:, 2])


def write_gps_csv(path, track: GpsTrack) -> None:
    data = np.column_stack([track.t, track.lat, track.lon])
    np.savetxt(path, data, delimiter=",", header=",".join(GPS_HEADER), comments="",
               fmt=["%.3f", "%.7f", "%.7f"])


def write_label_csv(path, labels: ContextLabelStream) -> None:
    data = np.column_stack([labels.times, labels.probs])
    np.savetxt(path, data, delimiter=",", header=",".join(LABEL_HEADER), comments="",
               fmt=["%.3f", "%.6g"])


def read_label_csv(path, subject_id: str | None = None) -> ContextLabelStream:
    path = Path(path)
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None or tuple(h.strip() for h in header) != LABEL_HEADER:
        raise InvalidInput(f"{path}: expected header {','.join(LABEL_HEADER)}, got {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if len(data) == 0:
        raise InvalidInput(f"{path}: no label rows")
    t = data[:, 0]
    if len(t) > 1 and not np.allclose(np.diff(t), 1.0, atol=1e-6):
        raise InvalidInput(f"{path}: labels must be sampled at exactly 1 Hz")
    return ContextLabelStream(subject_id or path.stem, float(t[0]), data[:, 1])
