"""Digital mobility outcomes (DMOs) per bout and per window.

The native extractor only estimates temporal step features from the
vertical acceleration.  Spatial descriptors (lengths, speed, support
phases) can only enter through :func:`import_dmo_table`, which ingests the
output of an external gait toolbox.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from .errors import InvalidInput

DMO_NAMES = (
    "number_of_steps",
    "step_duration",
    "step_duration_asymmetry",
    "step_length",
    "step_length_asymmetry",
    "stride_length",
    "stride_length_asymmetry",
    "stride_duration",
    "stride_duration_asymmetry",
    "cadence",
    "initial_double_support",
    "terminal_double_support",
    "double_support_asymmetry",
    "single_limb_support",
    "single_limb_support_asymmetry",
    "stance",
    "stance_asymmetry",
    "swing",
    "swing_asymmetry",
    "gait_speed",
)
NATIVE_DMOS = ("number_of_steps", "step_duration", "step_duration_asymmetry", "cadence")
DMO_KEY_COLUMNS = ("subject", "window_index", "bout_index")


@dataclass
class DmoRecord:
    """Bout-level descriptors; features missing from ``features`` are masked."""

    subject: str
    window_index: int
    bout_index: int
    features: dict[str, float] = field(default_factory=dict)
    duration_s: float | None = None
    label: int | None = None

    def available(self, name: str) -> bool:
        return name in self.features

    @property
    def mask(self) -> dict[str, bool]:
        return {name: name in self.features for name in DMO_NAMES}


@dataclass
class WindowDmo:
    subject: str
    window_index: int
    features: dict[str, float]
    n_bouts: int
    label: int | None = None

    @property
    def mask(self) -> dict[str, bool]:
        return {name: name in self.features for name in DMO_NAMES}


@dataclass(frozen=True)
class StepDetectorConfig:
    k_sigma: float = 0.5
    rolling_window_s: float = 1.0
    min_step_interval_s: float = 0.25


def detect_steps(x: np.ndarray, fs: float, cfg: StepDetectorConfig | None = None) -> np.ndarray:
    """Sample indices of step peaks in a vertical acceleration trace."""
    cfg = cfg or StepDetectorConfig()
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 3 or np.std(x) == 0:
        return np.array([], dtype=int)
    size = max(1, int(round(cfg.rolling_window_s * fs)))
    threshold = uniform_filter1d(x, size, mode="nearest") + cfg.k_sigma * np.std(x)
    distance = max(1, int(round(cfg.min_step_interval_s * fs)))
    peaks, _ = find_peaks(x, height=threshold, distance=distance)
    return peaks


def refine_peaks(x: np.ndarray, peaks: np.ndarray) -> np.ndarray:
    """Sub-sample peak positions from a parabola through each peak and its neighbours."""
    x = np.asarray(x, dtype=np.float64)
    pos = peaks.astype(np.float64)
    inner = (peaks > 0) & (peaks < len(x) - 1)
    p = peaks[inner]
    left, mid, right = x[p - 1], x[p], x[p + 1]
    denom = left - 2 * mid + right
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(denom != 0, 0.5 * (left - right) / denom, 0.0)
    pos[inner] += np.clip(delta, -0.5, 0.5)
    return pos


def step_features(step_times_s: np.ndarray, duration_s: float) -> dict[str, float]:
    """Temporal features from step instants; interval features need >= 2 steps."""
    n = len(step_times_s)
    feats = {"number_of_steps": float(n), "cadence": 60.0 * n / duration_s}
    if n >= 2:
        intervals = np.diff(step_times_s)
        mean_all = intervals.mean()
        feats["step_duration"] = float(mean_all)
        odd, even = intervals[0::2], intervals[1::2]
        if len(even) and mean_all > 0:
            feats["step_duration_asymmetry"] = float(abs(odd.mean() - even.mean()) / mean_all)
        else:
            feats["step_duration_asymmetry"] = 0.0
    return feats


def extract_basic_dmos(bout, channel=None, cfg: StepDetectorConfig | None = None,
                       axis: str = "z") -> DmoRecord:
    """Native step/cadence descriptors for one walking bout.

    ``channel`` defaults to the bout's vertical acceleration.
    """
    fs = bout.window.stream.sample_rate_hz
    if channel is None:
        x = bout.channel("vertical", axis)
    else:
        x = getattr(channel, "values", channel)
    x = np.asarray(x, dtype=np.float64)
    duration = len(x) / fs
    peaks = refine_peaks(x, detect_steps(x, fs, cfg))
    return DmoRecord(bout.subject_id, bout.window.index, bout.bout_index,
                     step_features(peaks / fs, duration), duration, bout.label)


def aggregate_window_dmos(records: Sequence[DmoRecord]) -> WindowDmo:
    """Sum step counts and average every other available descriptor."""
    if not records:
        raise InvalidInput("cannot aggregate an empty set of bouts")
    keys = {(r.subject, r.window_index) for r in records}
    if len(keys) != 1:
        raise InvalidInput(f"records span several windows: {sorted(keys)}")
    subject, widx = keys.pop()
    feats = {}
    for name in DMO_NAMES:
        vals = [r.features[name] for r in records if name in r.features]
        if not vals:
            continue
        feats[name] = math.fsum(vals) if name == "number_of_steps" else math.fsum(vals) / len(vals)
    labels = {r.label for r in records}
    label = labels.pop() if len(labels) == 1 else None
    return WindowDmo(subject, widx, feats, len(records), label)


def aggregate_all_windows(records: Sequence[DmoRecord]) -> list[WindowDmo]:
    groups: dict[tuple[str, int], list[DmoRecord]] = {}
    for r in records:
        groups.setdefault((r.subject, r.window_index), []).append(r)
    return [aggregate_window_dmos(groups[k]) for k in sorted(groups, key=_natural_key)]


def _natural_key(key):
    subject, widx = key
    return (int(subject) if subject.isdigit() else math.inf, subject, widx)


_NONNEGATIVE = {n for n in DMO_NAMES if not n.endswith("asymmetry")}


def import_dmo_table(path) -> list[DmoRecord]:
    """Read ``subject,window_index,bout_index,<features...>``.

    Columns absent from the file are masked for every record; an empty cell
    masks that feature for that row only.
    """
    path = Path(path)
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if tuple(header[:3]) != DMO_KEY_COLUMNS:
            raise InvalidInput(f"{path}: first columns must be {','.join(DMO_KEY_COLUMNS)}")
        extra = [h for h in header[3:] if h != "label"]
        unknown = [h for h in extra if h not in DMO_NAMES]
        if unknown:
            raise InvalidInput(f"{path}: unknown DMO column {unknown[0]!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise InvalidInput(f"{path}: row {lineno}: expected {len(header)} columns")
            cells = dict(zip(header, (c.strip() for c in row)))
            try:
                widx, bidx = int(cells["window_index"]), int(cells["bout_index"])
            except ValueError:
                raise InvalidInput(f"{path}: row {lineno}: window/bout index must be integers") from None
            feats = {}
            for name in extra:
                text = cells[name]
                if text == "":
                    continue
                try:
                    value = float(text)
                except ValueError:
                    raise InvalidInput(f"{path}: row {lineno}, column {name!r}: "
                                       f"non-numeric value {text!r}") from None
                if not math.isfinite(value):
                    raise InvalidInput(f"{path}: row {lineno}, column {name!r}: non-finite value")
                if name in _NONNEGATIVE and value < 0:
                    raise InvalidInput(f"{path}: row {lineno}, column {name!r}: "
                                       f"negative value {value}")
                feats[name] = value
            label = None
            if cells.get("label", "") != "":
                label = _parse_label(cells["label"], path, lineno)
            records.append(DmoRecord(cells["subject"], widx, bidx, feats, None, label))
    return records


def _parse_label(text, path, lineno):
    if text in ("indoor", "1"):
        return 1
    if text in ("outdoor", "0"):
        return 0
    raise InvalidInput(f"{path}: row {lineno}: bad label {text!r}")


def write_dmo_table(path, records, include_label: bool = True) -> None:
    """Write bout records (or window aggregates, with ``bout_index`` = -1)."""
    columns = [n for n in DMO_NAMES if any(n in r.features for r in records)]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(list(DMO_KEY_COLUMNS) + columns + (["label"] if include_label else []))
        for r in records:
            row = [r.subject, r.window_index, getattr(r, "bout_index", -1)]
            row += [repr(r.features[c]) if c in r.features else "" for c in columns]
            if include_label:
                row.append("" if r.label is None else ("indoor" if r.label == 1 else "outdoor"))
            out.writerow(row)


class ZScoreScaler:
    """Column standardization fitted on training rows only.

    Zero-variance columns map to zero.
    """

    def fit(self, X) -> "ZScoreScaler":
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or len(X) < 2:
            raise InvalidInput("z-scoring needs a 2-D matrix with at least two rows")
        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0)
        return self

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        scale = np.where(self.scale_ > 0, self.scale_, 1.0)
        Z = (X - self.mean_) / scale
        Z[:, self.scale_ == 0] = 0.0
        return Z

    def fit_transform(self, X) -> np.ndarray:
        return self.fit(X).transform(X)


def zscore_feature_matrix(dataset):
    """Standardize a :class:`TabularDataset`; returns ``(dataset, scaler)``.

    Apply ``scaler.transform`` to validation rows.
    """
    scaler = ZScoreScaler().fit(dataset.X)
    return dataset.with_X(scaler.transform(dataset.X)), scaler


def records_to_dataset(records, feature_names: Sequence[str] | None = None):
    """Tabular dataset from DMO records (bout- or window-level).

    Features masked in every record are dropped; rows that still miss one of
    the remaining features are dropped as well.  Records without a label are
    skipped.
    """
    from .tabular_classifiers import TabularDataset

    records = [r for r in records if r.label is not None]
    if not records:
        raise InvalidInput("no labelled records")
    if feature_names is None:
        feature_names = [n for n in DMO_NAMES if any(n in r.features for r in records)]
    if not feature_names:
        raise InvalidInput("every feature is masked")
    rows = [r for r in records if all(n in r.features for n in feature_names)]
    if not rows:
        raise InvalidInput("no record has all retained features")
    X = np.array([[r.features[n] for n in feature_names] for r in rows], dtype=np.float64)
    y = np.array([r.label for r in rows], dtype=int)
    subjects = np.array([r.subject for r in rows])
    return TabularDataset(X, y, subjects, list(feature_names))
