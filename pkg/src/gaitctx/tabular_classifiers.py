"""Feature-based binary classifiers: logistic, ridge, k-NN and Gaussian NB.

All models follow the same small contract: a ``fit_*`` function takes a
:class:`TabularDataset` and returns an immutable fitted model exposing
``predict(X)`` and ``summary()`` (a JSON-friendly dict).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_expit, logsumexp

from .errors import DegenerateTraining, InvalidInput


@dataclass(frozen=True)
class TabularDataset:
    X: np.ndarray
    y: np.ndarray
    subjects: np.ndarray
    feature_names: list[str]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] < 1:
            raise InvalidInput("X must be a 2-D matrix with at least one column")
        if not np.isfinite(X).all():
            raise InvalidInput("X contains non-finite entries")
        y = np.asarray(self.y)
        subjects = np.asarray(self.subjects)
        if len(y) != len(X) or len(subjects) != len(X):
            raise InvalidInput("X, y and subjects must have the same number of rows")
        if len(self.feature_names) != X.shape[1]:
            raise InvalidInput("feature_names must match the number of columns")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "subjects", subjects)
        object.__setattr__(self, "feature_names", list(self.feature_names))

    def __len__(self) -> int:
        return len(self.X)

    def subset(self, idx) -> "TabularDataset":
        idx = np.asarray(idx)
        return TabularDataset(self.X[idx], self.y[idx], self.subjects[idx], self.feature_names)

    def with_X(self, X) -> "TabularDataset":
        return replace(self, X=X)

    def columns(self, names: Sequence[str]) -> "TabularDataset":
        idx = [self.feature_names.index(n) for n in names]
        return TabularDataset(self.X[:, idx], self.y, self.subjects, list(names))


def _two_classes(y) -> np.ndarray:
    classes = np.unique(y)
    if len(classes) != 2:
        raise DegenerateTraining(f"need exactly two classes, found {len(classes)}")
    return classes


def balanced_class_weights(y) -> dict:
    """``n / (n_classes * n_c)`` per class."""
    classes, counts = np.unique(y, return_counts=True)
    n = len(y)
    return {c: n / (len(classes) * k) for c, k in zip(classes.tolist(), counts)}


@dataclass(frozen=True)
class FittedModel:
    kind: str
    classes: np.ndarray
    config: dict = field(default_factory=dict)

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def summary(self) -> dict:
        return {"kind": self.kind, "classes": self.classes.tolist(), "config": dict(self.config)}


def _as_matrix(X, n_features: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != n_features:
        raise InvalidInput(f"expected {n_features} features, got {X.shape[1]}")
    return X


# -- logistic regression -----------------------------------------------------

@dataclass(frozen=True)
class LogisticModel(FittedModel):
    coef: np.ndarray = None
    intercept: float = 0.0
    converged: bool = True
    n_iter: int = 0

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X @ self.coef).ravel() + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        if not hasattr(X, "tocsr"):
            X = _as_matrix(X, len(self.coef))
        return np.where(self.decision_function(X) > 0, self.classes[1], self.classes[0])

    def summary(self) -> dict:
        out = super().summary()
        out.update(coef=self.coef.tolist(), intercept=self.intercept,
                   converged=self.converged, n_iter=self.n_iter)
        return out


def fit_logistic_arrays(X, y, l2_strength: float = 1.0, max_iter: int = 1000,
                        balanced: bool = True, tol: float = 1e-6) -> LogisticModel:
    """L2-penalized logistic regression on a dense or sparse matrix.

    Minimizes ``sum_i w_i * log(1 + exp(-s_i f(x_i))) + l2_strength / 2 * |coef|^2``
    with an unpenalized intercept, ``s_i`` in {-1, +1}, using L-BFGS.
    """
    if l2_strength <= 0:
        raise InvalidInput("l2_strength must be positive")
    y = np.asarray(y)
    classes = _two_classes(y)
    sign = np.where(y == classes[1], 1.0, -1.0)
    if balanced:
        cw = balanced_class_weights(y)
        sw = np.array([cw[v] for v in y.tolist()])
    else:
        sw = np.ones(len(y))
    d = X.shape[1]

    def objective(theta):
        coef, b = theta[:d], theta[d]
        z = np.asarray(X @ coef).ravel() + b
        loss = -np.sum(sw * log_expit(sign * z)) + 0.5 * l2_strength * coef @ coef
        # d/dz of -log sigmoid(s z) = -s * sigmoid(-s z)
        g = -sw * sign * expit(-sign * z)
        grad = np.empty(d + 1)
        grad[:d] = np.asarray(X.T @ g).ravel() + l2_strength * coef
        grad[d] = g.sum()
        return loss, grad

    res = minimize(objective, np.zeros(d + 1), jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "gtol": tol, "ftol": 0.0})
    if not res.success and res.nit >= max_iter:
        warnings.warn("logistic regression reached max_iter without converging",
                      RuntimeWarning, stacklevel=2)
    config = {"l2_strength": l2_strength, "max_iter": max_iter, "balanced": balanced}
    return LogisticModel("logistic", classes, config, res.x[:d].copy(), float(res.x[d]),
                         bool(res.success), int(res.nit))


def fit_logistic(data: TabularDataset, l2_strength: float = 1.0, max_iter: int = 1000,
                 balanced: bool = True) -> LogisticModel:
    return fit_logistic_arrays(data.X, data.y, l2_strength, max_iter, balanced)


# -- ridge classifier --------------------------------------------------------

DEFAULT_ALPHAS = tuple(np.logspace(-3, 3, 10))


@dataclass(frozen=True)
class RidgeModel(FittedModel):
    mean: np.ndarray = None
    scale: np.ndarray = None
    coef: np.ndarray = None
    intercept: float = 0.0
    alpha: float = 1.0
    loo_errors: np.ndarray = None

    def decision_function(self, X) -> np.ndarray:
        X = _as_matrix(X, len(self.coef))
        return ((X - self.mean) / self.scale) @ self.coef + self.intercept

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0, self.classes[1], self.classes[0])

    def summary(self) -> dict:
        out = super().summary()
        out.update(alpha=self.alpha, loo_errors=self.loo_errors.tolist(),
                   intercept=self.intercept, coef=self.coef.tolist())
        return out


def standardize_columns(X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standardized copy plus the mean and (safe) scale used."""
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return (X - mean) / scale, mean, scale


def ridge_loo_errors(Z, target, alphas) -> np.ndarray:
    """Mean squared leave-one-out error for each alpha.

    Uses the exact hat-matrix identity ``e_i / (1 - H_ii)`` for ridge with an
    unpenalized intercept, computed from one thin SVD of the centred design.
    """
    n = len(Z)
    Zc = Z - Z.mean(axis=0)
    tc = target - target.mean()
    U, s, _ = np.linalg.svd(Zc, full_matrices=False)
    Uty = U.T @ tc
    s2 = s ** 2
    errors = np.empty(len(alphas))
    for k, alpha in enumerate(alphas):
        shrink = s2 / (s2 + alpha)
        fitted = target.mean() + U @ (shrink * Uty)
        hat_diag = 1.0 / n + (U ** 2) @ shrink
        with np.errstate(divide="ignore", invalid="ignore"):
            loo = (target - fitted) / (1.0 - hat_diag)
        errors[k] = np.mean(loo ** 2)
    return errors


def ridge_solve(Z, target, alpha: float) -> tuple[np.ndarray, float]:
    """Coefficients and intercept of ridge regression with unpenalized intercept."""
    zmean = Z.mean(axis=0)
    Zc = Z - zmean
    tmean = target.mean()
    U, s, Vt = np.linalg.svd(Zc, full_matrices=False)
    coef = Vt.T @ ((s / (s ** 2 + alpha)) * (U.T @ (target - tmean)))
    return coef, float(tmean - zmean @ coef)


def fit_ridge_arrays(X, y, alphas: Sequence[float] = DEFAULT_ALPHAS) -> RidgeModel:
    alphas = np.asarray(alphas, dtype=np.float64)
    if len(alphas) < 2 or (alphas <= 0).any():
        raise InvalidInput("need at least two positive alphas")
    y = np.asarray(y)
    classes = _two_classes(y)
    target = np.where(y == classes[1], 1.0, -1.0)
    X = np.asarray(X, dtype=np.float64)
    Z, mean, scale = standardize_columns(X)
    errors = ridge_loo_errors(Z, target, alphas)
    if np.isfinite(errors).any():
        best = int(np.nanargmin(np.where(np.isfinite(errors), errors, np.nan)))
    else:
        warnings.warn("leave-one-out errors are undefined; using the largest alpha",
                      RuntimeWarning, stacklevel=2)
        best = int(np.argmax(alphas))
    coef, intercept = ridge_solve(Z, target, alphas[best])
    return RidgeModel("ridge", classes, {"alphas": alphas.tolist()}, mean, scale, coef,
                      intercept, float(alphas[best]), errors)


def fit_ridge_classifier(data: TabularDataset,
                         alphas: Sequence[float] = DEFAULT_ALPHAS) -> RidgeModel:
    return fit_ridge_arrays(data.X, data.y, alphas)


# -- k nearest neighbours ----------------------------------------------------

@dataclass(frozen=True)
class KnnModel(FittedModel):
    X: np.ndarray = None
    y: np.ndarray = None
    k: int = 5

    def neighbours(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Indices and distances of the k nearest training rows (stable order)."""
        X = _as_matrix(X, self.X.shape[1])
        d2 = ((X[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        idx = np.argsort(d2, axis=1, kind="stable")[:, :self.k]
        return idx, np.sqrt(np.take_along_axis(d2, idx, axis=1))

    def predict(self, X) -> np.ndarray:
        idx, dist = self.neighbours(X)
        out = np.empty(len(idx), dtype=self.y.dtype)
        for r in range(len(idx)):
            labels = self.y[idx[r]]
            best = None
            for c in self.classes:
                members = labels == c
                votes = int(members.sum())
                if votes == 0:
                    continue
                key = (-votes, dist[r][members].mean())
                if best is None or key < best[0]:
                    best = (key, c)
            out[r] = best[1]
        return out


def fit_knn(data: TabularDataset, k: int = 5) -> KnnModel:
    if k <= 0:
        raise InvalidInput("k must be positive")
    if k > len(data):
        raise InvalidInput(f"k={k} exceeds the {len(data)} training rows")
    return KnnModel("knn", np.unique(data.y), {"k": k}, data.X.copy(), data.y.copy(), k)


# -- Gaussian naive Bayes ----------------------------------------------------

@dataclass(frozen=True)
class GnbModel(FittedModel):
    theta: np.ndarray = None   # (n_classes, d) means
    var: np.ndarray = None     # (n_classes, d) floored variances
    log_prior: np.ndarray = None
    epsilon: float = 0.0

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = _as_matrix(X, self.theta.shape[1])
        out = np.empty((len(X), len(self.classes)))
        for c in range(len(self.classes)):
            ll = -0.5 * np.sum(np.log(2 * np.pi * self.var[c]))
            ll = ll - 0.5 * np.sum((X - self.theta[c]) ** 2 / self.var[c], axis=1)
            out[:, c] = self.log_prior[c] + ll
        return out

    def predict_log_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return jll - logsumexp(jll, axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        return self.classes[np.argmax(self.joint_log_likelihood(X), axis=1)]

    def summary(self) -> dict:
        out = super().summary()
        out.update(means=self.theta.tolist(), variances=self.var.tolist(),
                   priors=np.exp(self.log_prior).tolist())
        return out


def fit_gnb(data: TabularDataset, var_smoothing: float = 1e-9) -> GnbModel:
    classes = _two_classes(data.y)
    X = data.X
    epsilon = var_smoothing * float(np.max(X.var(axis=0)))
    if epsilon == 0:
        epsilon = var_smoothing
    theta = np.array([X[data.y == c].mean(axis=0) for c in classes])
    var = np.array([X[data.y == c].var(axis=0) for c in classes]) + epsilon
    prior = np.array([np.mean(data.y == c) for c in classes])
    return GnbModel("gnb", classes, {"var_smoothing": var_smoothing}, theta, var,
                    np.log(prior), epsilon)


# -- constant baseline -------------------------------------------------------

@dataclass(frozen=True)
class MajorityModel(FittedModel):
    value: object = None

    def predict(self, X) -> np.ndarray:
        return np.full(len(X) if not hasattr(X, "shape") else X.shape[0], self.value)


def fit_majority(data: TabularDataset) -> MajorityModel:
    values, counts = np.unique(data.y, return_counts=True)
    return MajorityModel("majority", values, {}, values[np.argmax(counts)])


TABULAR_MODELS = {
    "logistic": fit_logistic,
    "ridge": fit_ridge_classifier,
    "knn": fit_knn,
    "gnb": fit_gnb,
    "majority": fit_majority,
}
