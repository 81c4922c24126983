"""Symbolic bag-of-patterns classification with SAX and SFA words.

Series are cut into sliding windows at several resolutions, every window is
turned into a short word, and the per-series word counts feed a
chi-squared filter and an L2 logistic regression.  SAX words quantize
piecewise means of z-normalized windows with Gaussian breakpoints; SFA
words quantize leading Fourier coefficients with breakpoints chosen to
maximize information gain against the class labels.

Words carry their representation and window length as a prefix (for
example ``sax32:abba`` or ``sfa64:cadb|cabb`` for a bigram), so bags built
at different resolutions never collide.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from numpy.lib.stride_tricks import sliding_window_view
from scipy.stats import norm

from ..errors import DegenerateTraining, InvalidInput, NotFitted
from ..tabular_classifiers import LogisticModel, fit_logistic_arrays

ALPHABET = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class SymbolicConfig:
    representation: str
    window_lengths: tuple[int, ...]
    word_length: int = 4
    alphabet_size: int = 4
    bigrams: bool = False
    stride: int = 1
    numerosity_reduction: bool = True

    def __post_init__(self):
        if self.representation not in ("sax", "sfa"):
            raise InvalidInput(f"unknown representation {self.representation!r}")
        if not self.window_lengths:
            raise InvalidInput("at least one window length is required")
        object.__setattr__(self, "window_lengths", tuple(int(w) for w in self.window_lengths))
        if not 2 <= self.alphabet_size <= len(ALPHABET):
            raise InvalidInput("alphabet_size must be between 2 and 26")
        if self.word_length < 1 or self.word_length > min(self.window_lengths):
            raise InvalidInput("word_length must be in [1, min(window_lengths)]")
        if self.stride < 1:
            raise InvalidInput("stride must be positive")

    @property
    def binning(self) -> str:
        return "gaussian" if self.representation == "sax" else "information_gain"


def _series(x) -> np.ndarray:
    x = np.asarray(getattr(x, "values", x), dtype=np.float64).ravel()
    if len(x) == 0:
        raise InvalidInput("empty series")
    return x


def _windows(x: np.ndarray, w: int, stride: int) -> np.ndarray:
    w = min(w, len(x))
    return sliding_window_view(x, w)[::stride]


def _spell(symbols: np.ndarray) -> list[str]:
    return ["".join(ALPHABET[s] for s in row) for row in symbols]


def _reduce(words: list[str]) -> list[str]:
    out = []
    for w in words:
        if not out or out[-1] != w:
            out.append(w)
    return out


# -- SAX -----------------------------------------------------------------------

def gaussian_breakpoints(alphabet_size: int) -> np.ndarray:
    return norm.ppf(np.arange(1, alphabet_size) / alphabet_size)


def paa(windows: np.ndarray, word_length: int) -> np.ndarray:
    """Piecewise aggregate means of each row over ``word_length`` segments."""
    w = windows.shape[1]
    bounds = (np.arange(word_length + 1) * w) // word_length
    csum = np.concatenate([np.zeros((len(windows), 1)), np.cumsum(windows, axis=1)], axis=1)
    return (csum[:, bounds[1:]] - csum[:, bounds[:-1]]) / np.diff(bounds)


def znorm_rows(windows: np.ndarray) -> np.ndarray:
    mean = windows.mean(axis=1, keepdims=True)
    centred = windows - mean
    sd = np.sqrt((centred ** 2).mean(axis=1, keepdims=True))
    # tiny spreads relative to the level are floating-point noise, not signal
    flat = sd <= 1e-12 * np.maximum(np.abs(mean), 1.0)
    return np.where(flat, 0.0, centred / np.where(flat, 1.0, sd))


def sax_word_sequence(x, window_length: int, cfg: SymbolicConfig) -> list[str]:
    """Words of successive windows (before numerosity reduction)."""
    wins = znorm_rows(_windows(_series(x), window_length, cfg.stride))
    means = paa(wins, min(cfg.word_length, wins.shape[1]))
    # a value equal to a breakpoint falls into the lower bin
    symbols = np.searchsorted(gaussian_breakpoints(cfg.alphabet_size), means, side="left")
    return _spell(symbols)


def sax_words(series, cfg: SymbolicConfig) -> Counter:
    """Bag of SAX words over every configured window length."""
    if cfg.representation != "sax":
        raise InvalidInput("sax_words needs a SAX configuration")
    bag: Counter = Counter()
    for w in cfg.window_lengths:
        words = sax_word_sequence(series, w, cfg)
        if cfg.numerosity_reduction:
            words = _reduce(words)
        bag.update(f"sax{w}:{word}" for word in words)
        if cfg.bigrams:
            bag.update(_bigrams(f"sax{w}:", words, w, cfg.stride))
    return bag


def _bigrams(prefix: str, words: list[str], w: int, stride: int) -> list[str]:
    # pair each window with the next non-overlapping one
    offset = max(1, -(-w // stride))
    return [f"{prefix}{a}|{b}" for a, b in zip(words, words[offset:])]


# -- SFA -----------------------------------------------------------------------

def fourier_coefficients(windows: np.ndarray, word_length: int) -> np.ndarray:
    """Leading real/imaginary DFT coefficients of mean-removed windows.

    The DC term is skipped (it is zero after mean removal); columns alternate
    ``re1, im1, re2, im2, ...`` and are zero-filled when the window is too
    short to provide them.
    """
    centred = windows - windows.mean(axis=1, keepdims=True)
    spec = np.fft.rfft(centred, axis=1)[:, 1:]
    inter = np.empty((len(windows), 2 * spec.shape[1]))
    inter[:, 0::2] = spec.real
    inter[:, 1::2] = spec.imag
    out = np.zeros((len(windows), word_length))
    k = min(word_length, inter.shape[1])
    out[:, :k] = inter[:, :k]
    return out


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy (bits) of each row of class counts."""
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / np.where(total > 0, total, 1), 0.0)
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def best_split(values: np.ndarray, labels: np.ndarray, classes: np.ndarray):
    """Threshold maximizing information gain, as ``(gain, threshold)``.

    ``values`` must be sorted.  Returns ``(0.0, None)`` when no split between
    distinct values exists.
    """
    n = len(values)
    if n < 2:
        return 0.0, None
    onehot = (labels[:, None] == classes[None, :]).astype(np.float64)
    left = np.cumsum(onehot, axis=0)[:-1]
    right = onehot.sum(axis=0) - left
    valid = values[1:] > values[:-1]
    if not valid.any():
        return 0.0, None
    nl = np.arange(1, n)
    parent = _entropy(onehot.sum(axis=0))
    gain = parent - (nl * _entropy(left) + (n - nl) * _entropy(right)) / n
    gain = np.where(valid, gain, -np.inf)
    i = int(np.argmax(gain))
    return float(gain[i]), 0.5 * (values[i] + values[i + 1])


def information_gain_breakpoints(values, labels, n_bins: int, tol: float = 1e-12) -> np.ndarray:
    """Supervised breakpoints for one coefficient.

    Splits are chosen greedily, always taking the segment/threshold pair with
    the largest sample-weighted gain.  A coefficient whose best first split
    gains nothing falls back to equi-depth bins.
    """
    values = np.asarray(values, dtype=np.float64)
    labels = np.asarray(labels)
    order = np.argsort(values, kind="stable")
    values, labels = values[order], labels[order]
    classes = np.unique(labels)
    n = len(values)

    first_gain, _ = best_split(values, labels, classes)
    if first_gain <= tol:
        return equi_depth_breakpoints(values, n_bins)

    segments = [(0, n)]
    cuts: list[float] = []
    while len(cuts) < n_bins - 1:
        best = None
        for si, (a, b) in enumerate(segments):
            gain, thr = best_split(values[a:b], labels[a:b], classes)
            if thr is None:
                continue
            weighted = gain * (b - a) / n
            if best is None or weighted > best[0]:
                best = (weighted, si, thr)
        if best is None:
            break
        if best[0] <= tol:
            # nothing informative left: halve the largest segment instead
            si = max(range(len(segments)), key=lambda i: segments[i][1] - segments[i][0])
            a, b = segments[si]
            thr = values[(a + b) // 2]
            if not values[a] < thr:
                break
        else:
            _, si, thr = best
            a, b = segments[si]
        cut = a + int(np.searchsorted(values[a:b], thr, side="right"))
        segments[si:si + 1] = [(a, cut), (cut, b)]
        cuts.append(thr)
    return np.sort(np.asarray(cuts, dtype=np.float64))


def equi_depth_breakpoints(values, n_bins: int) -> np.ndarray:
    values = np.sort(np.asarray(values, dtype=np.float64))
    cuts = np.quantile(values, np.arange(1, n_bins) / n_bins)
    return np.unique(cuts)


class SFA:
    """Symbolic Fourier approximation with supervised breakpoints."""

    def __init__(self, cfg: SymbolicConfig, fit_stride: int | None = None):
        if cfg.representation != "sfa":
            raise InvalidInput("SFA needs an SFA configuration")
        self.cfg = cfg
        self.fit_stride = fit_stride
        self.breakpoints_: dict[int, list[np.ndarray]] | None = None

    def _coefficients(self, x, w: int, stride: int) -> np.ndarray:
        return fourier_coefficients(_windows(_series(x), w, stride), self.cfg.word_length)

    def fit(self, series: Sequence, y) -> "SFA":
        y = np.asarray(y)
        self.breakpoints_ = {}
        for w in self.cfg.window_lengths:
            stride = self.fit_stride or max(self.cfg.stride, w // 2)
            coefs, labels = [], []
            for x, label in zip(series, y):
                c = self._coefficients(x, w, stride)
                coefs.append(c)
                labels.append(np.full(len(c), label))
            coefs = np.concatenate(coefs)
            labels = np.concatenate(labels)
            self.breakpoints_[w] = [
                information_gain_breakpoints(coefs[:, j], labels, self.cfg.alphabet_size)
                for j in range(self.cfg.word_length)
            ]
        return self

    def word_sequence(self, x, w: int) -> list[str]:
        if self.breakpoints_ is None:
            raise NotFitted("SFA breakpoints have not been fitted")
        c = self._coefficients(x, w, self.cfg.stride)
        symbols = np.column_stack([
            np.searchsorted(bp, c[:, j], side="left")
            for j, bp in enumerate(self.breakpoints_[w])
        ])
        return _spell(symbols)

    def transform_one(self, x) -> Counter:
        bag: Counter = Counter()
        for w in self.cfg.window_lengths:
            words = self.word_sequence(x, w)
            bag.update(f"sfa{w}:{word}" for word in words)
            if self.cfg.bigrams:
                bag.update(_bigrams(f"sfa{w}:", words, w, self.cfg.stride))
        return bag

    def transform(self, series: Sequence) -> list[Counter]:
        return [self.transform_one(x) for x in series]


def sfa_words(train_series, train_y, cfg: SymbolicConfig, apply_series=None):
    """Fit SFA breakpoints on the training split and return bags of words.

    Returns ``(train_bags, apply_bags, sfa)``; ``apply_bags`` is ``None`` when
    no ``apply_series`` is given.
    """
    sfa = SFA(cfg).fit(train_series, train_y)
    train_bags = sfa.transform(train_series)
    apply_bags = sfa.transform(apply_series) if apply_series is not None else None
    return train_bags, apply_bags, sfa


# -- linear classifier over bags ---------------------------------------------

def chi2_scores(X, y, classes) -> np.ndarray:
    """Chi-squared statistic of non-negative count features against labels."""
    X = sp.csr_matrix(X)
    Y = np.column_stack([(y == c).astype(np.float64) for c in classes])
    observed = np.asarray((sp.csr_matrix(Y.T) @ X).todense())
    totals = np.asarray(X.sum(axis=0)).ravel()
    expected = np.outer(Y.mean(axis=0), totals)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    return terms.sum(axis=0)


def _bags_to_matrix(bags: Sequence[Counter], vocab: dict[str, int]) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for r, bag in enumerate(bags):
        for word, count in bag.items():
            c = vocab.get(word)
            if c is not None:
                rows.append(r)
                cols.append(c)
                vals.append(count)
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(bags), len(vocab)), dtype=np.float64)


class SymbolicLinearModel:
    kind = "symbolic"

    def __init__(self, configs, transformers, vocab, scale, logistic: LogisticModel):
        self.configs = configs
        self.transformers = transformers
        self.vocab = vocab
        self.scale = scale
        self.logistic = logistic
        self.classes = logistic.classes

    def bags(self, series) -> list[Counter]:
        return _bags(series, self.configs, self.transformers)

    def features(self, series) -> sp.csr_matrix:
        X = _bags_to_matrix(self.bags(series), self.vocab)
        return X @ sp.diags(1.0 / self.scale)

    def predict(self, series) -> np.ndarray:
        return self.logistic.predict(self.features(series))

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "configs": [c.__dict__ for c in self.configs],
            "vocabulary_size": len(self.vocab),
            "logistic": {k: v for k, v in self.logistic.summary().items() if k != "coef"},
        }


def _bags(series, configs, transformers) -> list[Counter]:
    bags = [Counter() for _ in series]
    for cfg, tr in zip(configs, transformers):
        if cfg.representation == "sax":
            for bag, x in zip(bags, series):
                bag.update(sax_words(x, cfg))
        else:
            for bag, x in zip(bags, series):
                bag.update(tr.transform_one(x))
    return bags


def fit_symbolic_linear(series: Sequence, y, configs: Sequence[SymbolicConfig],
                        top_k: int = 10_000, l2_strength: float = 1.0,
                        max_iter: int = 1000) -> SymbolicLinearModel:
    """Multi-resolution SAX/SFA bag-of-words features with a logistic head.

    Words are ranked by chi-squared against the training labels and the top
    ``top_k`` with a positive score are kept.
    """
    configs = list(configs)
    series = list(series)
    y = np.asarray(y)
    if len({w for c in configs for w in c.window_lengths}) < 2:
        raise InvalidInput("a multi-resolution set needs at least two window lengths")
    classes = np.unique(y)
    if len(classes) != 2:
        raise DegenerateTraining(f"need exactly two classes, found {len(classes)}")

    transformers = [SFA(c).fit(series, y) if c.representation == "sfa" else None
                    for c in configs]
    bags = _bags(series, configs, transformers)
    words = sorted(set().union(*bags))
    full = _bags_to_matrix(bags, {w: i for i, w in enumerate(words)})
    scores = chi2_scores(full, y, classes)
    order = np.argsort(-scores, kind="stable")
    keep = [i for i in order[:top_k] if scores[i] > 0]
    if not keep:
        raise DegenerateTraining("no word separates the classes (empty vocabulary)")
    keep = sorted(keep)
    vocab = {words[i]: j for j, i in enumerate(keep)}
    X = full[:, keep]
    scale = np.asarray(abs(X).max(axis=0).todense()).ravel()
    scale[scale == 0] = 1.0
    X = X @ sp.diags(1.0 / scale)
    logistic = fit_logistic_arrays(X.tocsr(), y, l2_strength, max_iter, balanced=True)
    return SymbolicLinearModel(configs, transformers, vocab, scale, logistic)


def default_symbolic_configs(series_length: int) -> list[SymbolicConfig]:
    """SAX and SFA-with-bigrams at three resolutions scaled to the series length."""
    windows = sorted({max(8, series_length // k) for k in (48, 24, 12)})
    windows = [min(w, series_length) for w in windows]
    if len(set(windows)) < 2:
        windows = sorted({max(2, series_length // 2), series_length})
    stride = max(1, min(windows) // 8)
    word = min(4, min(windows))
    return [
        SymbolicConfig("sax", tuple(windows), word_length=word, alphabet_size=4, stride=stride),
        SymbolicConfig("sfa", tuple(windows), word_length=word, alphabet_size=4,
                       bigrams=True, stride=stride),
    ]
