"""Labelled collections of univariate series and their construction from windows/bouts."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core_signal import pad_to_length, resample_to_length, zscore
from ..errors import InvalidInput
from ..tabular_classifiers import TabularDataset

LENGTH_MODES = ("pad", "resample", "original")


@dataclass(frozen=True)
class SeriesDataset:
    """``series`` share one length in ``fixed`` mode; ``variable`` allows any lengths."""

    series: list
    y: np.ndarray
    subjects: np.ndarray
    length_mode: str = "fixed"
    keys: list = field(default_factory=list)

    def __post_init__(self):
        series = [np.asarray(getattr(s, "values", s), dtype=np.float64).ravel() for s in self.series]
        y = np.asarray(self.y)
        subjects = np.asarray(self.subjects)
        if len(y) != len(series) or len(subjects) != len(series):
            raise InvalidInput("series, y and subjects must have the same length")
        if self.length_mode not in ("fixed", "variable"):
            raise InvalidInput(f"unknown length_mode {self.length_mode!r}")
        if any(len(s) == 0 for s in series):
            raise InvalidInput("empty series")
        if self.length_mode == "fixed" and len({len(s) for s in series}) > 1:
            raise InvalidInput("fixed-length dataset holds series of different lengths")
        if len(np.unique(y)) > 2:
            raise InvalidInput("labels must be binary")
        object.__setattr__(self, "series", series)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "subjects", subjects)
        object.__setattr__(self, "keys", list(self.keys) or [None] * len(series))

    def __len__(self) -> int:
        return len(self.series)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.series])

    @property
    def length(self) -> int:
        if self.length_mode != "fixed":
            raise InvalidInput("variable-length dataset has no single length")
        return len(self.series[0])

    def matrix(self) -> np.ndarray:
        if self.length_mode != "fixed":
            raise InvalidInput("this operation needs equal-length series (pad or resample first)")
        return np.vstack(self.series)

    def subset(self, idx) -> "SeriesDataset":
        idx = np.asarray(idx, dtype=int)
        return SeriesDataset([self.series[i] for i in idx], self.y[idx], self.subjects[idx],
                             self.length_mode, [self.keys[i] for i in idx])


def conform_length(data: SeriesDataset, length_mode: str,
                   target_len: int | None = None) -> SeriesDataset:
    """Pad or resample every series to ``target_len`` (default: the longest).

    ``original`` keeps native lengths.
    """
    if length_mode not in LENGTH_MODES:
        raise InvalidInput(f"length_mode must be one of {LENGTH_MODES}, got {length_mode!r}")
    if length_mode == "original":
        return SeriesDataset(data.series, data.y, data.subjects, "variable", data.keys)
    target = int(target_len or data.lengths.max())
    if length_mode == "pad":
        if data.lengths.max() > target:
            raise InvalidInput(f"target_len {target} is shorter than the longest series")
        series = [pad_to_length(x, target).values for x in data.series]
    else:
        series = [resample_to_length(x, target).values for x in data.series]
    return SeriesDataset(series, data.y, data.subjects, "fixed", data.keys)


def build_series_dataset(items: Sequence, channel: str = "magnitude", axis: str = "z",
                         length_mode: str = "pad", target_len: int | None = None,
                         normalize: bool = False) -> SeriesDataset:
    """Series dataset from labelled windows or walking bouts.

    ``pad`` and ``resample`` bring every series to ``target_len`` (default:
    the longest item); ``original`` keeps native lengths.  Items without a
    label are skipped.  ``normalize`` z-scores each series on its own.
    """
    items = [it for it in items if it.label is not None]
    if not items:
        raise InvalidInput("no labelled items")
    raw = [it.channel(channel, axis) for it in items]
    if normalize:
        raw = [zscore(x).values for x in raw]
    keys = [(it.subject_id, it.window.index if hasattr(it, "window") else it.index,
             getattr(it, "bout_index", -1)) for it in items]
    native = SeriesDataset(raw, np.array([it.label for it in items], dtype=int),
                           np.array([it.subject_id for it in items]), "variable", keys)
    return conform_length(native, length_mode, target_len)


def features_to_tabular(features: np.ndarray, data: SeriesDataset, prefix: str) -> TabularDataset:
    names = [f"{prefix}{i}" for i in range(features.shape[1])]
    return TabularDataset(features, data.y, data.subjects, names)


def write_series_csv(path, data: SeriesDataset) -> None:
    """One row per series: ``subject,window_index,bout_index,label,length,v0,v1,...``."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["subject", "window_index", "bout_index", "label", "length", "values..."])
        for key, label, subj, x in zip(data.keys, data.y, data.subjects, data.series):
            widx, bidx = (key[1], key[2]) if key else (-1, -1)
            out.writerow([subj, widx, bidx, int(label), len(x)] + [f"{v:.6g}" for v in x])


def read_series_csv(path) -> SeriesDataset:
    series, y, subjects, keys = [], [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for lineno, row in enumerate(reader, start=2):
            try:
                n = int(row[4])
                values = np.array(row[5:], dtype=np.float64)
            except (ValueError, IndexError):
                raise InvalidInput(f"{path}: row {lineno}: malformed series row") from None
            if len(values) != n:
                raise InvalidInput(f"{path}: row {lineno}: length column says {n}, "
                                   f"found {len(values)} values")
            series.append(values)
            y.append(int(row[3]))
            subjects.append(row[0])
            keys.append((row[0], int(row[1]), int(row[2])))
    if not series:
        raise InvalidInput(f"{path}: no series")
    mode = "fixed" if len({len(s) for s in series}) == 1 else "variable"
    return SeriesDataset(series, np.array(y), np.array(subjects), mode, keys)
