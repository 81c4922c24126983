"""Random convolutional kernel transform (ROCKET).

Each kernel has a random length in {7, 9, 11}, mean-centred Gaussian
weights, a uniform bias in (-1, 1), an exponentially distributed dilation
and a coin-flip padding flag.  Every kernel contributes two pooled
features per series: the proportion of positive values (PPV) and the
maximum of the convolution output.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from ..errors import InvalidInput

KERNEL_LENGTHS = (7, 9, 11)


@dataclass(frozen=True)
class RocketKernelBank:
    """Flat storage for a bank of random kernels.

    ``weights`` holds every kernel's taps back to back; kernel ``k`` owns
    ``weights[offsets[k]:offsets[k] + lengths[k]]``.
    """

    input_length: int
    lengths: np.ndarray
    offsets: np.ndarray
    weights: np.ndarray
    biases: np.ndarray
    dilations: np.ndarray
    paddings: np.ndarray
    seed: int | None = None

    @property
    def num_kernels(self) -> int:
        return len(self.lengths)

    @property
    def num_features(self) -> int:
        return 2 * self.num_kernels

    def kernel(self, k: int) -> dict:
        o, n = self.offsets[k], self.lengths[k]
        return {
            "length": int(n),
            "weights": self.weights[o:o + n].tolist(),
            "bias": float(self.biases[k]),
            "dilation": int(self.dilations[k]),
            "padding": int(self.paddings[k]),
        }

    def to_json(self) -> str:
        """Seeded descriptor; kernels are regenerated from the seed on load."""
        if self.seed is None:
            raise InvalidInput("only seeded kernel banks can be serialized")
        return json.dumps({
            "kind": "rocket",
            "input_length": self.input_length,
            "num_kernels": self.num_kernels,
            "seed": self.seed,
        })

    @classmethod
    def from_json(cls, text: str) -> "RocketKernelBank":
        desc = json.loads(text)
        if desc.get("kind") != "rocket":
            raise InvalidInput(f"not a rocket kernel descriptor: {desc.get('kind')!r}")
        return generate_kernels(desc["input_length"], desc["num_kernels"], desc["seed"])


def generate_kernels(input_length: int, num_kernels: int = 10_000,
                     seed: int | None = None) -> RocketKernelBank:
    if input_length < 1:
        raise InvalidInput("input_length must be positive")
    if num_kernels < 1:
        raise InvalidInput("num_kernels must be positive")
    rng = np.random.default_rng(seed)

    lengths = rng.choice(KERNEL_LENGTHS, num_kernels).astype(np.int64)
    offsets = np.zeros(num_kernels, dtype=np.int64)
    offsets[1:] = np.cumsum(lengths)[:-1]
    weights = np.empty(lengths.sum(), dtype=np.float64)
    biases = rng.uniform(-1.0, 1.0, num_kernels)
    dilations = np.empty(num_kernels, dtype=np.int64)
    paddings = np.empty(num_kernels, dtype=np.int64)

    for k in range(num_kernels):
        n = lengths[k]
        w = rng.normal(0.0, 1.0, n)
        weights[offsets[k]:offsets[k] + n] = w - w.mean()
        upper = np.log2((input_length - 1) / (n - 1)) if input_length > n else 0.0
        dilations[k] = int(2 ** rng.uniform(0.0, max(upper, 0.0)))
        paddings[k] = ((n - 1) * dilations[k]) // 2 if rng.integers(2) else 0

    return RocketKernelBank(input_length, lengths, offsets, weights, biases,
                            dilations, paddings, seed)


@njit(fastmath=True, cache=True)
def _apply_kernel(x, weights, length, bias, dilation, padding, out):
    n = x.shape[0]
    out_len = n + 2 * padding - (length - 1) * dilation
    if out_len <= 0:
        return 0.0, 0.0, False
    buf = out[:out_len]
    buf[:] = bias
    for j in range(length):
        w = weights[j]
        shift = j * dilation - padding
        # output i reads x[i + shift]; restrict to the in-range part
        lo = max(0, -shift)
        hi = min(out_len, n - shift)
        if hi <= lo:
            continue
        dst = buf[lo:hi]
        src = x[lo + shift:hi + shift]
        for i in range(hi - lo):
            dst[i] += w * src[i]
    positive = 0
    best = -np.inf
    for i in range(out_len):
        v = buf[i]
        positive += v > 0
        best = max(best, v)
    return positive / out_len, best, True


@njit(parallel=True, cache=True)
def _apply_kernels(X, lengths, offsets, weights, biases, dilations, paddings):
    n_series, n_timepoints = X.shape
    n_kernels = lengths.shape[0]
    features = np.zeros((n_series, 2 * n_kernels))
    short = np.zeros(n_series, dtype=np.bool_)
    max_pad = 0
    for k in range(n_kernels):
        max_pad = max(max_pad, paddings[k])
    for s in prange(n_series):
        out = np.empty(n_timepoints + 2 * max_pad)
        x = X[s]
        for k in range(n_kernels):
            o = offsets[k]
            ppv, mx, ok = _apply_kernel(x, weights[o:o + lengths[k]], lengths[k],
                                        biases[k], dilations[k], paddings[k], out)
            if ok:
                features[s, 2 * k] = ppv
                features[s, 2 * k + 1] = mx
            else:
                short[s] = True
    return features, short


def rocket_transform(X, bank: RocketKernelBank) -> np.ndarray:
    """Map ``(n_series, length)`` to ``(n_series, 2 * num_kernels)`` features.

    Columns alternate PPV and max per kernel.  A kernel whose dilated extent
    exceeds an unpadded series yields the pair ``(0, 0)``.
    """
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    if X.ndim != 2 or X.shape[1] == 0:
        raise InvalidInput("expected a non-empty 2-D array of equal-length series")
    if not np.isfinite(X).all():
        raise InvalidInput("series contain non-finite values")
    features, short = _apply_kernels(X, bank.lengths, bank.offsets, bank.weights,
                                     bank.biases, bank.dilations, bank.paddings)
    if short.any():
        warnings.warn(f"{int(short.sum())} series shorter than some kernel extents; "
                      "those features were set to 0", RuntimeWarning, stacklevel=2)
    return features
