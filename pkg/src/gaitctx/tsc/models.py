"""Series classifiers with a shared ``fit(data)`` / ``predict(data)`` interface.

ROCKET's transform is data-independent once the kernel bank is drawn, so
its features may be computed once and handed to ``fit``/``predict``
through the ``features`` argument.  MiniROCKET and the symbolic model
learn parts of their transform and must see only the training split.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput
from ..tabular_classifiers import DEFAULT_ALPHAS, fit_ridge_arrays
from .datasets import SeriesDataset
from .dtw import Knn1Dtw
from .minirocket import fit_minirocket, minirocket_transform
from .rocket import generate_kernels, rocket_transform
from .symbolic import default_symbolic_configs, fit_symbolic_linear


class RocketClassifier:
    kind = "rocket"
    stateless_transform = True

    def __init__(self, num_kernels: int = 10_000, seed: int | None = 0, alphas=DEFAULT_ALPHAS):
        self.num_kernels = num_kernels
        self.seed = seed
        self.alphas = alphas
        self.bank_ = None

    def transform(self, data: SeriesDataset) -> np.ndarray:
        if self.bank_ is None or self.bank_.input_length != data.length:
            self.bank_ = generate_kernels(data.length, self.num_kernels, self.seed)
        return rocket_transform(data.matrix(), self.bank_)

    def fit(self, data: SeriesDataset, features=None) -> "RocketClassifier":
        F = self.transform(data) if features is None else features
        self.head_ = fit_ridge_arrays(F, data.y, self.alphas)
        return self

    def predict(self, data: SeriesDataset, features=None) -> np.ndarray:
        F = self.transform(data) if features is None else features
        return self.head_.predict(F)

    def summary(self) -> dict:
        return {"kind": self.kind, "num_kernels": self.num_kernels, "seed": self.seed,
                "alpha": self.head_.alpha}


class MiniRocketClassifier:
    kind = "minirocket"
    stateless_transform = False

    def __init__(self, num_features: int = 10_000, max_dilations_per_kernel: int = 32,
                 seed: int | None = 0, alphas=DEFAULT_ALPHAS):
        self.num_features = num_features
        self.max_dilations_per_kernel = max_dilations_per_kernel
        self.seed = seed
        self.alphas = alphas

    def fit(self, data: SeriesDataset) -> "MiniRocketClassifier":
        X = data.matrix()
        self.params_ = fit_minirocket(X, self.num_features, self.max_dilations_per_kernel, self.seed)
        self.head_ = fit_ridge_arrays(minirocket_transform(X, self.params_), data.y, self.alphas)
        return self

    def predict(self, data: SeriesDataset) -> np.ndarray:
        return self.head_.predict(minirocket_transform(data.matrix(), self.params_))

    def summary(self) -> dict:
        return {"kind": self.kind, "num_features": self.params_.num_features,
                "dilations": self.params_.dilations.tolist(), "seed": self.seed,
                "alpha": self.head_.alpha}


class DtwClassifier:
    kind = "dtw"
    stateless_transform = False

    def __init__(self, window: int | None = None):
        self.window = window

    def fit(self, data: SeriesDataset) -> "DtwClassifier":
        self.knn_ = Knn1Dtw(self.window).fit(data.series, data.y)
        return self

    def predict(self, data: SeriesDataset) -> np.ndarray:
        return self.knn_.predict(data.series)

    def summary(self) -> dict:
        return self.knn_.summary()


class SymbolicClassifier:
    kind = "symbolic"
    stateless_transform = False

    def __init__(self, configs=None, top_k: int = 10_000, l2_strength: float = 1.0):
        self.configs = configs
        self.top_k = top_k
        self.l2_strength = l2_strength

    def fit(self, data: SeriesDataset) -> "SymbolicClassifier":
        configs = self.configs or default_symbolic_configs(int(data.lengths.min()))
        self.model_ = fit_symbolic_linear(data.series, data.y, configs, self.top_k, self.l2_strength)
        return self

    def predict(self, data: SeriesDataset) -> np.ndarray:
        return self.model_.predict(data.series)

    def summary(self) -> dict:
        return self.model_.summary()


SERIES_MODELS = {
    "rocket": RocketClassifier,
    "minirocket": MiniRocketClassifier,
    "dtw": DtwClassifier,
    "symbolic": SymbolicClassifier,
}
FIXED_LENGTH_MODELS = ("rocket", "minirocket")


def make_series_model(name: str, **params):
    try:
        cls = SERIES_MODELS[name]
    except KeyError:
        raise InvalidInput(f"unknown series model {name!r}") from None
    return cls(**params)
