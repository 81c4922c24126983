"""Dynamic time warping and the 1-nearest-neighbour classifier built on it."""

from __future__ import annotations

import numpy as np
from numba import njit

from ..errors import InvalidInput


@njit(cache=True)
def _dtw(a, b, window):
    n, m = a.shape[0], b.shape[0]
    prev = np.full(m + 1, np.inf)
    curr = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        curr[:] = np.inf
        lo, hi = 1, m
        if window >= 0:
            # band around the length-scaled diagonal
            centre = (i - 1) * (m - 1) / max(n - 1, 1) + 1
            lo = max(1, int(np.ceil(centre - window)))
            hi = min(m, int(np.floor(centre + window)))
        ai = a[i - 1]
        for j in range(lo, hi + 1):
            d = ai - b[j - 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if curr[j - 1] < best:
                best = curr[j - 1]
            curr[j] = d * d + best
        prev, curr = curr, prev
    return prev[m]


def _as_series(x) -> np.ndarray:
    x = np.asarray(getattr(x, "values", x), dtype=np.float64).ravel()
    if len(x) == 0:
        raise InvalidInput("DTW needs non-empty series")
    return x


def dtw_distance(a, b, window: int | None = None) -> float:
    """Accumulated squared-difference cost of the optimal warping path.

    Both series are aligned at their first and last samples.  ``window``
    optionally restricts warping to a band around the diagonal; ``None``
    leaves it unconstrained.
    """
    return float(_dtw(_as_series(a), _as_series(b), -1 if window is None else int(window)))


def pairwise_dtw(test, train, window: int | None = None) -> np.ndarray:
    test = [_as_series(s) for s in test]
    train = [_as_series(s) for s in train]
    w = -1 if window is None else int(window)
    out = np.empty((len(test), len(train)))
    for i, a in enumerate(test):
        for j, b in enumerate(train):
            out[i, j] = _dtw(a, b, w)
    return out


class Knn1Dtw:
    """1-NN under DTW; distance ties go to the lower training index."""

    kind = "dtw"

    def __init__(self, window: int | None = None):
        self.window = window

    def fit(self, series, y) -> "Knn1Dtw":
        series = list(series)
        if not series:
            raise InvalidInput("training set is empty")
        self.train_ = [_as_series(s) for s in series]
        self.y_ = np.asarray(y)
        self.classes = np.unique(self.y_)
        return self

    def predict(self, series) -> np.ndarray:
        dist = pairwise_dtw(series, self.train_, self.window)
        return self.y_[np.argmin(dist, axis=1)]

    def summary(self) -> dict:
        return {"kind": self.kind, "window": self.window, "n_train": len(self.train_)}


def knn1_dtw_fit_predict(train_series, train_y, test_series, window: int | None = None) -> np.ndarray:
    return Knn1Dtw(window).fit(train_series, train_y).predict(test_series)
