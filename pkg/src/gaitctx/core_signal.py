"""Inertial stream containers and channel/shape transforms.

Everything here is a pure function of its inputs.  Series are carried as
:class:`UnivariateSeries` (a thin wrapper around a float array plus
provenance) so that downstream datasets can keep track of which subject,
window and bout a signal came from.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInput

AXES = ("x", "y", "z")
IMU_HEADER = ("t", "acc_x", "acc_y", "acc_z")
UNIFORMITY_TOL_S = 1e-6


@dataclass(frozen=True)
class InertialStream:
    """Uniformly sampled tri-axial acceleration for one subject.

    ``samples`` has shape ``(n, 3)`` with columns ``acc_x, acc_y, acc_z``.
    """

    subject_id: str
    sample_rate_hz: float
    start_time: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[1] != 3:
            raise InvalidInput(f"samples must have shape (n, 3), got {samples.shape}")
        if len(samples) == 0:
            raise InvalidInput("inertial stream is empty")
        if not self.sample_rate_hz > 0:
            raise InvalidInput("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz

    def axis(self, name: str) -> np.ndarray:
        if name not in AXES:
            raise InvalidInput(f"axis must be one of {AXES}, got {name!r}")
        return self.samples[:, AXES.index(name)]


@dataclass(frozen=True)
class UnivariateSeries:
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if len(values) == 0:
            raise InvalidInput("series must contain at least one value")
        if not np.isfinite(values).all():
            raise InvalidInput("series contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)

    def with_values(self, values) -> "UnivariateSeries":
        return UnivariateSeries(values, dict(self.meta))


def _values(series) -> np.ndarray:
    if isinstance(series, UnivariateSeries):
        return series.values
    return UnivariateSeries(series).values


def _wrap(series, values) -> UnivariateSeries:
    meta = dict(series.meta) if isinstance(series, UnivariateSeries) else {}
    return UnivariateSeries(values, meta)


def vertical_channel(stream: InertialStream, axis_selector: str = "z") -> UnivariateSeries:
    """Return the axis aligned with gravity for the given sensor mounting."""
    if axis_selector not in AXES:
        raise InvalidInput(f"axis_selector must be one of {AXES}, got {axis_selector!r}")
    return UnivariateSeries(stream.axis(axis_selector).copy(), {"subject_id": stream.subject_id})


def magnitude_channel(stream: InertialStream) -> UnivariateSeries:
    # summing sorted squares makes the result exactly independent of axis order
    sq = np.sort(stream.samples ** 2, axis=1)
    mag = np.sqrt(sq[:, 0] + sq[:, 1] + sq[:, 2])
    return UnivariateSeries(mag, {"subject_id": stream.subject_id})


def zscore(series) -> UnivariateSeries:
    """Standardize with the population standard deviation.

    A constant series maps to all zeros.
    """
    x = _values(series)
    centered = x - x.mean()
    sd = np.sqrt(np.mean(centered ** 2))
    if sd == 0 or not np.isfinite(sd):
        return _wrap(series, np.zeros_like(x))
    return _wrap(series, centered / sd)


def pad_to_length(series, target_len: int) -> UnivariateSeries:
    """Centre ``series`` in ``target_len`` zeros; odd slack goes to the end."""
    x = _values(series)
    if target_len < 1:
        raise InvalidInput("target_len must be positive")
    if len(x) > target_len:
        raise InvalidInput(f"series of length {len(x)} exceeds target length {target_len}")
    slack = target_len - len(x)
    lead = slack // 2
    out = np.zeros(target_len)
    out[lead:lead + len(x)] = x
    return _wrap(series, out)


def resample_to_length(series, target_len: int) -> UnivariateSeries:
    """Linear interpolation over a uniform parameterization of [0, 1]."""
    x = _values(series)
    if len(x) < 2:
        raise InvalidInput("resampling needs at least two samples")
    if target_len < 2:
        raise InvalidInput("target_len must be at least 2")
    if target_len == len(x):
        return _wrap(series, x.copy())
    src = np.linspace(0.0, 1.0, len(x))
    dst = np.linspace(0.0, 1.0, target_len)
    out = np.interp(dst, src, x)
    out[0], out[-1] = x[0], x[-1]
    return _wrap(series, out)


def read_imu_csv(path, subject_id: str | None = None,
                 tol: float = UNIFORMITY_TOL_S) -> InertialStream:
    """Load a ``t,acc_x,acc_y,acc_z`` file, rejecting non-uniform sampling."""
    path = Path(path)
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None or tuple(h.strip() for h in header) != IMU_HEADER:
        raise InvalidInput(f"{path}: expected header {','.join(IMU_HEADER)}, got {header}")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise InvalidInput(f"{path}: {exc}") from None
    if data.shape[0] < 2:
        raise InvalidInput(f"{path}: need at least two samples")
    t = data[:, 0]
    dt = np.diff(t)
    step = (t[-1] - t[0]) / (len(t) - 1)
    if step <= 0:
        raise InvalidInput(f"{path}: timestamps must increase")
    # compare against the ideal grid so rounding in the file does not accumulate
    grid = t[0] + step * np.arange(len(t))
    bad = np.flatnonzero(np.abs(t - grid) > tol)
    if len(bad) or (dt <= 0).any():
        row = int(bad[0]) + 2 if len(bad) else int(np.argmin(dt)) + 3
        raise InvalidInput(f"{path}: non-uniform sampling near row {row}")
    rate = 1.0 / step
    if abs(rate - round(rate)) < 1e-6 * rate:
        rate = float(round(rate))
    return InertialStream(subject_id or path.stem, rate, float(t[0]), data[:, 1:4])


def write_imu_csv(path, stream: InertialStream) -> None:
    t = stream.start_time + np.arange(len(stream)) / stream.sample_rate_hz
    data = np.column_stack([t, stream.samples])
    np.savetxt(path, data, delimiter=",", header=",".join(IMU_HEADER), comments="",
               fmt=["%.4f", "%.6f", "%.6f", "%.6f"])
