"""Fixed-length windows, window labels, gait epochs and walking bouts."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .context_labeling import ContextLabelStream
from .core_signal import InertialStream, UnivariateSeries
from .errors import InvalidInput

INDOOR = 1
OUTDOOR = 0
LABEL_NAMES = {INDOOR: "indoor", OUTDOOR: "outdoor"}

BOUT_HEADER = ("subject", "window_index", "start_sample", "end_sample")
WINDOW_LABEL_HEADER = ("subject", "window_index", "label", "confidence")


@dataclass
class Window:
    """A fixed-length, non-overlapping chunk of an inertial stream."""

    stream: InertialStream
    index: int
    window_len_s: int
    label: int | None = None
    label_confidence: float | None = None
    label_status: str = "unlabeled"  # unlabeled | labeled | tie | missing

    @property
    def subject_id(self) -> str:
        return self.stream.subject_id

    @property
    def n_samples(self) -> int:
        return int(round(self.window_len_s * self.stream.sample_rate_hz))

    @property
    def start_sample(self) -> int:
        return self.index * self.n_samples

    @property
    def start_time(self) -> float:
        return self.stream.start_time + self.start_sample / self.stream.sample_rate_hz

    @property
    def samples(self) -> np.ndarray:
        s = self.start_sample
        return self.stream.samples[s:s + self.n_samples]

    def channel(self, name: str = "vertical", axis: str = "z") -> np.ndarray:
        """``vertical`` (the configured axis) or ``magnitude`` for this window."""
        s = self.samples
        if name == "vertical":
            return s[:, "xyz".index(axis)].copy()
        if name == "magnitude":
            return np.sqrt((s ** 2).sum(axis=1))
        raise InvalidInput(f"unknown channel {name!r}")


@dataclass(frozen=True)
class Epoch:
    window: Window
    offset: int
    length: int
    is_gait: bool
    score: float


@dataclass
class WalkingBout:
    window: Window
    start_sample: int
    end_sample: int
    series: UnivariateSeries | None = None
    bout_index: int = 0

    def __post_init__(self):
        if not 0 <= self.start_sample < self.end_sample <= self.window.n_samples:
            raise InvalidInput(
                f"bout [{self.start_sample}, {self.end_sample}) outside window of "
                f"{self.window.n_samples} samples")

    @property
    def label(self) -> int | None:
        return self.window.label

    @property
    def subject_id(self) -> str:
        return self.window.subject_id

    @property
    def n_samples(self) -> int:
        return self.end_sample - self.start_sample

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.window.stream.sample_rate_hz

    def channel(self, name: str = "vertical", axis: str = "z") -> np.ndarray:
        return self.window.channel(name, axis)[self.start_sample:self.end_sample]


@dataclass(frozen=True)
class GaitHeuristicConfig:
    epoch_s: float = 3.0
    energy_min: float = 0.05
    f_min: float = 0.5
    f_max: float = 3.0
    periodicity_min: float = 0.4


def chunk_windows(stream: InertialStream, window_len_s: int = 60) -> list[Window]:
    """Non-overlapping windows; the trailing remainder is dropped."""
    if window_len_s <= 0:
        raise InvalidInput("window_len_s must be positive")
    per_window = int(round(window_len_s * stream.sample_rate_hz))
    return [Window(stream, i, window_len_s) for i in range(len(stream) // per_window)]


def aggregate_window_label(window: Window, labels: ContextLabelStream) -> int | None:
    """Majority vote over the per-second probabilities inside ``window``.

    The most frequent probability value decides (indoor when it is above
    0.5).  Ties between the most frequent values, or a label stream that does
    not cover the window, leave the window unlabeled.  The result is also
    stored on the window together with the fraction of agreeing seconds.
    """
    offset = window.start_time - labels.t0
    first = int(round(offset))
    if abs(offset - first) > 1e-6:
        raise InvalidInput("window start is not aligned with the 1 Hz label grid")
    n = int(window.window_len_s)
    if first < 0 or first + n > len(labels):
        window.label, window.label_confidence, window.label_status = None, None, "missing"
        return None

    counts = Counter(labels.probs[first:first + n].tolist()).most_common()
    if len(counts) > 1 and counts[0][1] == counts[1][1]:
        window.label, window.label_confidence, window.label_status = None, counts[0][1] / n, "tie"
        return None
    mode, count = counts[0]
    window.label = INDOOR if mode > 0.5 else OUTDOOR
    window.label_confidence = count / n
    window.label_status = "labeled"
    return window.label


def autocorrelation(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Overlap-normalized autocorrelation ``r[0..max_lag]`` of a centred signal.

    Each lag is a Pearson-style correlation between the overlapping parts,
    so a pure periodic signal scores close to 1 at its period regardless of
    how much of the epoch the overlap covers.
    """
    x = np.asarray(x, dtype=np.float64)
    x = x - x.mean()
    n = len(x)
    r = np.zeros(max_lag + 1)
    energy = np.concatenate(([0.0], np.cumsum(x * x)))
    for k in range(min(max_lag, n - 1) + 1):
        head = energy[n - k]                  # sum x[:n-k]^2
        tail = energy[n] - energy[k]          # sum x[k:]^2
        denom = np.sqrt(head * tail)
        r[k] = np.dot(x[:n - k], x[k:]) / denom if denom > 0 else 0.0
    return r


def score_epoch(x: np.ndarray, fs: float, cfg: GaitHeuristicConfig) -> tuple[bool, float]:
    """Gait decision and periodicity score for one epoch."""
    if np.std(x) < cfg.energy_min:
        return False, 0.0
    lag_lo = max(1, int(np.floor(fs / cfg.f_max)))
    lag_hi = int(np.ceil(fs / cfg.f_min))
    r = autocorrelation(x, min(lag_hi + 1, len(x) - 1))
    lag_hi = min(lag_hi, len(r) - 2)
    if lag_hi <= lag_lo:
        return False, 0.0
    # local maxima only, so a monotone decay into the band edge is not a peak
    k = np.arange(lag_lo, lag_hi + 1)
    peaks = k[(r[k] >= r[k - 1]) & (r[k] >= r[k + 1])]
    if len(peaks) == 0:
        return False, 0.0
    best = peaks[np.argmax(r[peaks])]
    score = float(r[best])
    step_hz = fs / best
    return bool(cfg.f_min <= step_hz <= cfg.f_max and score >= cfg.periodicity_min), score


def detect_gait_epochs(window: Window, channel, cfg: GaitHeuristicConfig | None = None) -> list[Epoch]:
    """Tile ``window`` with fixed epochs and flag the gait-like ones."""
    cfg = cfg or GaitHeuristicConfig()
    x = channel.values if isinstance(channel, UnivariateSeries) else np.asarray(channel, float)
    fs = window.stream.sample_rate_hz
    epoch_len = int(round(cfg.epoch_s * fs))
    epochs = []
    for e in range(len(x) // epoch_len):
        seg = x[e * epoch_len:(e + 1) * epoch_len]
        is_gait, score = score_epoch(seg, fs, cfg)
        epochs.append(Epoch(window, e * epoch_len, epoch_len, is_gait, score))
    return epochs


def extract_bouts(window: Window, epochs: Sequence[Epoch], min_bout_epochs: int = 2) -> list[WalkingBout]:
    """Maximal runs of at least ``min_bout_epochs`` consecutive gait epochs."""
    if min_bout_epochs < 1:
        raise InvalidInput("min_bout_epochs must be positive")
    bouts = []
    run: list[Epoch] = []
    for ep in list(epochs) + [None]:
        if ep is not None and ep.is_gait:
            run.append(ep)
            continue
        if len(run) >= min_bout_epochs:
            start = run[0].offset
            end = run[-1].offset + run[-1].length
            bouts.append(WalkingBout(window, start, end, bout_index=len(bouts)))
        run = []
    return bouts


def segment_stream(stream: InertialStream, labels: ContextLabelStream | None = None,
                   window_len_s: int = 60, channel_axis: str = "z",
                   cfg: GaitHeuristicConfig | None = None,
                   min_bout_epochs: int = 2) -> tuple[list[Window], list[WalkingBout]]:
    """Windows (labelled when ``labels`` is given) and their heuristic bouts."""
    windows = chunk_windows(stream, window_len_s)
    bouts = []
    for w in windows:
        if labels is not None:
            aggregate_window_label(w, labels)
        epochs = detect_gait_epochs(w, w.channel("vertical", channel_axis), cfg)
        bouts.extend(extract_bouts(w, epochs, min_bout_epochs))
    return windows, bouts


def import_bout_annotations(windows: Iterable[Window], path) -> list[WalkingBout]:
    """Build bouts from a ``subject,window_index,start_sample,end_sample`` CSV.

    Rows must reference known windows and lie inside them; offending rows are
    reported by their line number.
    """
    lookup = {(w.subject_id, w.index): w for w in windows}
    bouts: list[WalkingBout] = []
    counters: Counter = Counter()
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != BOUT_HEADER:
            raise InvalidInput(f"{path}: expected header {','.join(BOUT_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise InvalidInput(f"{path}: row {lineno}: expected 4 columns")
            subject = row[0].strip()
            try:
                widx, start, end = (int(v) for v in row[1:])
            except ValueError:
                raise InvalidInput(f"{path}: row {lineno}: non-integer value") from None
            window = lookup.get((subject, widx))
            if window is None:
                raise InvalidInput(f"{path}: row {lineno}: unknown window ({subject}, {widx})")
            if not 0 <= start < end <= window.n_samples:
                raise InvalidInput(f"{path}: row {lineno}: sample range [{start}, {end}) "
                                   f"invalid for a {window.n_samples}-sample window")
            key = (subject, widx)
            bouts.append(WalkingBout(window, start, end, bout_index=counters[key]))
            counters[key] += 1
    return bouts


def write_bout_annotations(path, bouts: Sequence[WalkingBout]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(BOUT_HEADER)
        for b in bouts:
            out.writerow([b.subject_id, b.window.index, b.start_sample, b.end_sample])


def write_window_labels(path, windows: Sequence[Window]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(WINDOW_LABEL_HEADER)
        for w in windows:
            label = "" if w.label is None else LABEL_NAMES[w.label]
            conf = "" if w.label_confidence is None else f"{w.label_confidence:.6f}"
            out.writerow([w.subject_id, w.index, label, conf])


def read_window_labels(path) -> dict[tuple[str, int], tuple[int | None, float | None]]:
    names = {v: k for k, v in LABEL_NAMES.items()}
    result = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != WINDOW_LABEL_HEADER:
            raise InvalidInput(f"{path}: expected header {','.join(WINDOW_LABEL_HEADER)}")
        for row in reader:
            label = names[row["label"]] if row["label"] else None
            conf = float(row["confidence"]) if row["confidence"] else None
            result[(row["subject"], int(row["window_index"]))] = (label, conf)
    return result
