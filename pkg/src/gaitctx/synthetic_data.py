"""Seeded free-living scenarios (IMU + GPS) with known ground truth.

Each subject follows a schedule of indoor and outdoor episodes.  Indoors
the GPS sits still near a building (or goes silent for the whole dwell);
outdoors it follows a walking trajectory.  The lower-back accelerometer
alternates rest and activity sessions made of walking bouts.  Indoor and
outdoor gait overlap in cadence and bout length but differ in waveform:
outdoor steps carry sharper heel-strike transients, a different harmonic
mix and slow terrain drift.

Ground truth (the per-second context and the planted step instants) comes
straight from the schedule, never from the generated GPS.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .context_labeling import EARTH_RADIUS_M, GpsTrack, write_gps_csv
from .core_signal import InertialStream, write_imu_csv
from .errors import InvalidInput

INDOOR, OUTDOOR = 1, 0


@dataclass(frozen=True)
class GaitProfile:
    """Walking and resting behaviour in one context (accelerations in g)."""

    cadence_hz: tuple[float, float] = (1.6, 2.0)
    amplitude: tuple[float, float] = (0.25, 0.45)
    noise_sigma: float = 0.04
    drift_amplitude: float = 0.0
    drift_hz: tuple[float, float] = (0.1, 0.3)
    harmonics: tuple[float, float] = (0.35, 0.0)
    impact: float = 0.0
    step_jitter: float = 0.02
    bout_s: tuple[float, float] = (8.0, 40.0)
    bouts_per_session: tuple[int, int] = (1, 3)
    pause_s: tuple[float, float] = (4.0, 15.0)
    rest_s: tuple[float, float] = (120.0, 420.0)
    rest_noise_sigma: float = 0.008

    def __post_init__(self):
        lo, hi = self.cadence_hz
        if not 0.5 <= lo <= hi <= 3.0:
            raise InvalidInput("cadence range must lie within [0.5, 3.0] Hz")
        for name in ("bout_s", "pause_s", "rest_s", "amplitude"):
            a, b = getattr(self, name)
            if not 0 < a <= b:
                raise InvalidInput(f"{name} must be an increasing positive range")


INDOOR_GAIT = GaitProfile()
OUTDOOR_GAIT = GaitProfile(
    cadence_hz=(1.65, 2.05),
    noise_sigma=0.05,
    drift_amplitude=0.06,
    harmonics=(0.1, 0.25),
    impact=0.35,
    bout_s=(10.0, 50.0),
    rest_s=(220.0, 680.0),
)


@dataclass(frozen=True)
class ScenarioConfig:
    """``schedules`` holds, per subject, a sequence of ``(context, seconds)`` episodes."""

    schedules: tuple
    sample_rate_hz: float = 100.0
    indoor: GaitProfile = INDOOR_GAIT
    outdoor: GaitProfile = OUTDOOR_GAIT
    gps_noise_m: float = 1.5
    walking_speed_mps: float = 1.3
    silent_indoor_fraction: float = 0.5
    start_time: float = 0.0
    origin: tuple[float, float] = (45.07, 7.68)
    subject_ids: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if not self.schedules:
            raise InvalidInput("at least one subject schedule is required")
        for s, sched in enumerate(self.schedules):
            if not sched:
                raise InvalidInput(f"subject {s}: empty schedule")
            for ctx, dur in sched:
                if ctx not in (INDOOR, OUTDOOR) or dur <= 0 or dur != int(dur):
                    raise InvalidInput(f"subject {s}: episodes need a 0/1 context and "
                                       f"a positive whole number of seconds")
        if self.subject_ids and len(self.subject_ids) != len(self.schedules):
            raise InvalidInput("subject_ids must match the number of schedules")
        if not 0 <= self.silent_indoor_fraction <= 1:
            raise InvalidInput("silent_indoor_fraction must be in [0, 1]")

    @property
    def n_subjects(self) -> int:
        return len(self.schedules)

    def ids(self) -> list[str]:
        return [str(s) for s in self.subject_ids] or [str(i + 1) for i in range(self.n_subjects)]

    def duration_s(self, subject: int) -> int:
        return int(sum(d for _, d in self.schedules[subject]))


@dataclass
class SubjectScenario:
    subject_id: str
    stream: InertialStream
    gps: GpsTrack
    truth: np.ndarray                 # per-second context, 1 = indoor
    step_times: np.ndarray            # planted step instants (s, stream-relative)
    bouts: list = field(default_factory=list)   # (start_s, end_s, context)
    silent_dwells: list = field(default_factory=list)


def make_schedule(indoor_s: float, outdoor_s: float, rng: np.random.Generator,
                  episode_s: tuple[float, float] = (600.0, 1800.0)) -> list[tuple[int, int]]:
    """Alternating episodes that add up to the requested time in each context."""
    def pieces(total):
        out = []
        left = int(round(total))
        while left > 0:
            d = int(rng.uniform(*episode_s))
            # avoid a stub episode too short for a staypoint
            if left - d < episode_s[0] / 2:
                d = left
            out.append(d)
            left -= d
        return out

    ind, out = pieces(indoor_s), pieces(outdoor_s)
    first = INDOOR if rng.random() < 0.5 else OUTDOOR
    if not ind:
        first = OUTDOOR
    elif not out:
        first = INDOOR
    queues = {INDOOR: ind, OUTDOOR: out}
    schedule, ctx = [], first
    while queues[INDOOR] or queues[OUTDOOR]:
        if not queues[ctx]:
            ctx = 1 - ctx
        schedule.append((ctx, queues[ctx].pop(0)))
        ctx = 1 - ctx
    return schedule


# (indoor, outdoor) labelled windows per subject in the reference cohort
TABLE_III_WINDOWS = {
    "1": (176, 7), "2": (33, 31), "3": (0, 194), "4": (0, 4), "5": (179, 0),
    "6": (69, 0), "7": (176, 1), "8": (147, 33), "9": (25, 0),
}


def table_iii_config(scale: float = 1.0, seed: int = 0, window_s: int = 60,
                     episode_s: tuple[float, float] = (600.0, 1800.0), **kwargs) -> ScenarioConfig:
    """Nine subjects whose indoor/outdoor time mirrors the reference cohort.

    Each labelled window of the reference becomes ``scale * window_s``
    seconds of the matching context (at least one window per non-empty
    context).
    """
    rng = np.random.default_rng(seed)
    schedules = []
    for ind, out in TABLE_III_WINDOWS.values():
        ind_s = window_s * max(round(ind * scale), 1 if ind else 0)
        out_s = window_s * max(round(out * scale), 1 if out else 0)
        schedules.append(tuple(make_schedule(ind_s, out_s, rng, episode_s)))
    return ScenarioConfig(tuple(schedules), subject_ids=tuple(TABLE_III_WINDOWS), seed=seed,
                          **kwargs)


def uniform_config(n_subjects: int, indoor_s: float, outdoor_s: float, seed: int = 0,
                   episode_s: tuple[float, float] = (600.0, 1800.0), **kwargs) -> ScenarioConfig:
    rng = np.random.default_rng(seed)
    schedules = tuple(tuple(make_schedule(indoor_s, outdoor_s, rng, episode_s))
                      for _ in range(n_subjects))
    return ScenarioConfig(schedules, seed=seed, **kwargs)


# -- accelerometer -------------------------------------------------------------

def _activity_plan(rng, ctx: int, t0: float, t1: float, profile: GaitProfile):
    """Bouts ``(start, end)`` inside ``[t0, t1)``: sessions of bouts split by rests."""
    bouts = []
    t = t0 + rng.uniform(0, profile.rest_s[0])
    while t < t1:
        for _ in range(int(rng.integers(profile.bouts_per_session[0],
                                        profile.bouts_per_session[1] + 1))):
            end = min(t + rng.uniform(*profile.bout_s), t1)
            if end - t >= 2.0:
                bouts.append((t, end, ctx))
            t = end + rng.uniform(*profile.pause_s)
            if t >= t1:
                break
        t += rng.uniform(*profile.rest_s)
    return bouts


def _gait_segment(rng, n: int, fs: float, profile: GaitProfile):
    """Acceleration of one bout (x, y, z without gravity) and its step offsets (s)."""
    cadence = rng.uniform(*profile.cadence_hz)
    amp = rng.uniform(*profile.amplitude)
    duration = n / fs
    # step instants: jittered intervals, first step shortly after onset
    steps = [rng.uniform(0.1, 0.5) / cadence]
    while True:
        nxt = steps[-1] + (1.0 + profile.step_jitter * rng.standard_normal()) / cadence
        if nxt >= duration:
            break
        steps.append(nxt)
    steps = np.asarray(steps)
    t = np.arange(n) / fs
    # continuous step phase: integer values at step instants
    knots_t = np.concatenate(([steps[0] - 1 / cadence], steps, [steps[-1] + 1 / cadence]))
    knots_p = np.arange(len(knots_t), dtype=np.float64) - 1
    phase = 2 * np.pi * np.interp(t, knots_t, knots_p, left=np.nan, right=np.nan)
    phase = np.where(np.isnan(phase), 2 * np.pi * (t - steps[0]) * cadence, phase)

    h2, h3 = profile.harmonics
    z = amp * (np.cos(phase) + h2 * np.cos(2 * phase) + h3 * np.cos(3 * phase)) / (1 + h2 + h3)
    if profile.impact > 0:
        # short heel-strike transient right after each step peak
        width = 0.02 * fs
        for s in steps:
            centre = s * fs + 0.03 * fs
            lo, hi = int(max(0, centre - 4 * width)), int(min(n, centre + 4 * width + 1))
            k = np.arange(lo, hi)
            z[lo:hi] += profile.impact * amp * np.exp(-0.5 * ((k - centre) / width) ** 2) * np.sign(k - centre)
    if profile.drift_amplitude > 0:
        f = rng.uniform(*profile.drift_hz)
        z += profile.drift_amplitude * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    # onset/offset ramps so bouts do not start with a jump
    ramp = np.minimum(1.0, np.minimum(t, duration - t) / 0.3)
    z *= ramp
    x = 0.15 * amp * np.sin(phase / 2) * ramp
    y = 0.1 * amp * np.sin(phase + 0.7) * ramp
    noise = profile.noise_sigma * rng.standard_normal((3, n))
    return np.column_stack([x + noise[0], y + noise[1], z + noise[2]]), steps


def _imu(rng, cfg: ScenarioConfig, bouts, n_total: int):
    fs = cfg.sample_rate_hz
    acc = np.zeros((n_total, 3))
    acc[:, 2] = 1.0
    rest = np.array([cfg.indoor.rest_noise_sigma, cfg.outdoor.rest_noise_sigma])
    acc += rng.standard_normal((n_total, 3)) * rest.max()
    step_times = []
    for start, end, ctx in bouts:
        a, b = int(round(start * fs)), int(round(end * fs))
        profile = cfg.indoor if ctx == INDOOR else cfg.outdoor
        seg, steps = _gait_segment(rng, b - a, fs, profile)
        acc[a:b] += seg
        step_times.append(a / fs + steps)
    steps = np.concatenate(step_times) if step_times else np.array([])
    return acc, steps


# -- GPS -----------------------------------------------------------------------

def _offset(origin, north_m, east_m):
    lat0, lon0 = origin
    lat = lat0 + np.degrees(north_m / EARTH_RADIUS_M)
    lon = lon0 + np.degrees(east_m / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    return lat, lon


def _gps(rng, cfg: ScenarioConfig, schedule, silent):
    """1 Hz fixes; indoor dwells are stationary (or silent), outdoors keeps moving."""
    north, east = 0.0, 0.0
    heading = rng.uniform(0, 2 * np.pi)
    ts, ns, es = [], [], []
    t = 0
    for k, (ctx, dur) in enumerate(schedule):
        if ctx == INDOOR:
            if not silent[k]:
                ts.append(t + np.arange(dur))
                ns.append(np.full(dur, north))
                es.append(np.full(dur, east))
        else:
            turns = np.cumsum(0.05 * rng.standard_normal(dur)) + heading
            step = cfg.walking_speed_mps
            dn = np.cumsum(step * np.cos(turns))
            de = np.cumsum(step * np.sin(turns))
            ts.append(t + np.arange(dur))
            ns.append(north + dn)
            es.append(east + de)
            north, east = north + dn[-1], east + de[-1]
            heading = turns[-1]
        t += dur
    if not ts:
        return np.array([]), np.array([]), np.array([])
    tt = np.concatenate(ts).astype(np.float64)
    nn = np.concatenate(ns) + cfg.gps_noise_m * rng.standard_normal(len(tt))
    ee = np.concatenate(es) + cfg.gps_noise_m * rng.standard_normal(len(tt))
    lat, lon = _offset(cfg.origin, nn, ee)
    return tt, lat, lon


# -- scenario ------------------------------------------------------------------

def generate_subject(cfg: ScenarioConfig, subject: int, rng: np.random.Generator) -> SubjectScenario:
    schedule = cfg.schedules[subject]
    sid = cfg.ids()[subject]
    duration = cfg.duration_s(subject)
    fs = cfg.sample_rate_hz
    truth = np.concatenate([np.full(int(d), ctx, dtype=np.int8) for ctx, d in schedule])

    silent = [ctx == INDOOR and rng.random() < cfg.silent_indoor_fraction for ctx, _ in schedule]
    gps_rng, imu_rng = rng.spawn(2)
    t, lat, lon = _gps(gps_rng, cfg, schedule, silent)

    bouts, t0 = [], 0.0
    for ctx, dur in schedule:
        profile = cfg.indoor if ctx == INDOOR else cfg.outdoor
        bouts.extend(_activity_plan(imu_rng, ctx, t0, t0 + dur, profile))
        t0 += dur
    acc, steps = _imu(imu_rng, cfg, bouts, int(round(duration * fs)))

    stream = InertialStream(sid, fs, cfg.start_time, acc)
    track = GpsTrack(sid, t + cfg.start_time, lat, lon)
    starts = np.cumsum([0] + [d for _, d in schedule])
    dwells = [(float(starts[k]), float(starts[k + 1])) for k, s in enumerate(silent) if s]
    return SubjectScenario(sid, stream, track, truth, steps, bouts, dwells)


def generate_scenario(cfg: ScenarioConfig) -> list[SubjectScenario]:
    """One :class:`SubjectScenario` per schedule, each from its own seeded sub-stream."""
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_subjects)
    return [generate_subject(cfg, s, np.random.default_rng(children[s]))
            for s in range(cfg.n_subjects)]


def write_truth_csv(path, scenario: SubjectScenario, start_time: float = 0.0) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "indoor"])
        for i, v in enumerate(scenario.truth):
            out.writerow([f"{start_time + i:.3f}", int(v)])


def write_scenario(out_dir, scenarios: Sequence[SubjectScenario]) -> list[Path]:
    """``imu_<id>.csv``, ``gps_<id>.csv`` and ``truth_<id>.csv`` for every subject."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for sc in scenarios:
        paths = [out_dir / f"{kind}_{sc.subject_id}.csv" for kind in ("imu", "gps", "truth")]
        write_imu_csv(paths[0], sc.stream)
        write_gps_csv(paths[1], sc.gps)
        write_truth_csv(paths[2], sc, sc.stream.start_time)
        written.extend(paths)
    return written


def window_truth(truth: np.ndarray, window_len_s: int = 60) -> list[int | None]:
    """Majority ground-truth context per full window (``None`` on an exact tie)."""
    out = []
    for w in range(len(truth) // window_len_s):
        seg = truth[w * window_len_s:(w + 1) * window_len_s]
        ones = int(seg.sum())
        zeros = len(seg) - ones
        out.append(None if ones == zeros else int(ones > zeros))
    return out
