"""MiniROCKET: PPV features from a fixed family of 84 length-9 kernels.

Every kernel has weight -1 on six taps and 2 on three taps (so weights sum
to zero).  Dilations are spread exponentially up to the input length, the
feature budget is shared between dilations, and biases are quantiles of
the convolution output on randomly drawn training series.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np
from numba import njit, prange

from ..errors import InvalidInput, NotFitted

KERNEL_LENGTH = 9
KERNEL_INDICES = np.array(list(combinations(range(KERNEL_LENGTH), 3)), dtype=np.int64)
NUM_KERNELS = len(KERNEL_INDICES)  # 84


def kernel_weights() -> np.ndarray:
    """``(84, 9)`` weight matrix with entries in {-1, 2}."""
    w = -np.ones((NUM_KERNELS, KERNEL_LENGTH))
    for k, idx in enumerate(KERNEL_INDICES):
        w[k, idx] = 2.0
    return w


@dataclass(frozen=True)
class MiniRocketParams:
    input_length: int
    dilations: np.ndarray
    features_per_dilation: np.ndarray
    biases: np.ndarray | None = None
    seed: int | None = None

    @property
    def num_features(self) -> int:
        return NUM_KERNELS * int(self.features_per_dilation.sum())

    @property
    def is_fitted(self) -> bool:
        return self.biases is not None


def _quantiles(n: int) -> np.ndarray:
    phi = (np.sqrt(5.0) + 1.0) / 2.0
    return (np.arange(1, n + 1) * phi) % 1


def plan_dilations(input_length: int, num_features: int = 10_000,
                   max_dilations_per_kernel: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Dilations and how many features each contributes per kernel."""
    per_kernel = num_features // NUM_KERNELS
    if per_kernel < 1:
        raise InvalidInput(f"feature budget must be at least {NUM_KERNELS}")
    true_max = min(per_kernel, max_dilations_per_kernel)
    multiplier = per_kernel / true_max
    max_exponent = np.log2((input_length - 1) / (KERNEL_LENGTH - 1))
    dilations, counts = np.unique(
        np.floor(np.logspace(0, max_exponent, true_max, base=2)).astype(np.int64),
        return_counts=True)
    counts = (counts * multiplier).astype(np.int64)
    remainder = per_kernel - counts.sum()
    i = 0
    while remainder > 0:
        counts[i] += 1
        remainder -= 1
        i = (i + 1) % len(counts)
    return dilations, counts


def plan_minirocket(input_length: int, num_features: int = 10_000,
                    max_dilations_per_kernel: int = 32, seed: int | None = None) -> MiniRocketParams:
    if input_length < KERNEL_LENGTH:
        raise InvalidInput(f"series must have at least {KERNEL_LENGTH} points")
    dilations, counts = plan_dilations(input_length, num_features, max_dilations_per_kernel)
    return MiniRocketParams(input_length, dilations, counts, None, seed)


def _taps(x: np.ndarray, dilation: int) -> np.ndarray:
    L = len(x)
    pad = (KERNEL_LENGTH - 1) * dilation // 2
    xp = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    return np.stack([xp[j * dilation:j * dilation + L] for j in range(KERNEL_LENGTH)])


def _convolutions(x: np.ndarray, dilation: int) -> np.ndarray:
    """All 84 'same'-padded convolution outputs of one series, shape (84, L)."""
    taps = _taps(x, dilation)
    return -taps.sum(axis=0) + 3.0 * taps[KERNEL_INDICES].sum(axis=1)


def _convolution(x: np.ndarray, dilation: int, k: int) -> np.ndarray:
    taps = _taps(x, dilation)
    return -taps.sum(axis=0) + 3.0 * taps[KERNEL_INDICES[k]].sum(axis=0)


def fit_minirocket(X, num_features: int = 10_000, max_dilations_per_kernel: int = 32,
                   seed: int | None = None) -> MiniRocketParams:
    """Plan dilations for ``X``'s length and fit biases on ``X`` (training split only)."""
    X = _check(X)
    params = plan_minirocket(X.shape[1], num_features, max_dilations_per_kernel, seed)
    rng = np.random.default_rng(seed)
    quantiles = _quantiles(NUM_KERNELS * int(params.features_per_dilation.sum()))
    biases = np.empty(len(quantiles))
    q = 0
    for d, n_feat in zip(params.dilations, params.features_per_dilation):
        for k in range(NUM_KERNELS):
            example = X[rng.integers(len(X))]
            c = _convolution(example, int(d), k)
            biases[q:q + n_feat] = np.quantile(c, quantiles[q:q + n_feat])
            q += n_feat
    return replace(params, biases=biases)


@njit(parallel=True, fastmath=True, cache=True)
def _transform(X, dilations, counts, biases, indices):
    n, L = X.shape
    n_features = indices.shape[0] * counts.sum()
    out = np.zeros((n, n_features))
    for s in prange(n):
        x = X[s]
        alpha = np.empty(L)
        gamma = np.empty((9, L))
        c = np.empty(L)
        f = 0
        for di in range(dilations.shape[0]):
            d = dilations[di]
            pad = (9 - 1) * d // 2
            alpha[:] = 0.0
            for j in range(9):
                shift = j * d - pad
                g = gamma[j]
                g[:] = 0.0
                lo = max(0, -shift)
                hi = min(L, L - shift)
                for i in range(lo, hi):
                    g[i] = 3.0 * x[i + shift]
                    alpha[i] -= x[i + shift]
            for k in range(indices.shape[0]):
                a, b, e = indices[k, 0], indices[k, 1], indices[k, 2]
                for i in range(L):
                    c[i] = alpha[i] + gamma[a, i] + gamma[b, i] + gamma[e, i]
                # alternate between full output and the unpadded part
                if (di + k) % 2 == 0:
                    lo_c, hi_c = 0, L
                else:
                    lo_c, hi_c = pad, L - pad
                span = hi_c - lo_c
                for m in range(counts[di]):
                    bias = biases[f]
                    positive = 0
                    for i in range(lo_c, hi_c):
                        positive += c[i] > bias
                    out[s, f] = positive / span if span > 0 else 0.0
                    f += 1
    return out


def _check(X) -> np.ndarray:
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    if X.ndim != 2:
        raise InvalidInput("expected a 2-D array of equal-length series")
    if X.shape[1] < KERNEL_LENGTH:
        raise InvalidInput(f"series must have at least {KERNEL_LENGTH} points")
    if not np.isfinite(X).all():
        raise InvalidInput("series contain non-finite values")
    return X


def minirocket_transform(X, params: MiniRocketParams) -> np.ndarray:
    if not params.is_fitted:
        raise NotFitted("MiniROCKET biases have not been fitted")
    X = _check(X)
    if X.shape[1] != params.input_length:
        raise InvalidInput(f"fitted for length {params.input_length}, got {X.shape[1]}")
    return _transform(X, params.dilations, params.features_per_dilation, params.biases,
                      KERNEL_INDICES)
