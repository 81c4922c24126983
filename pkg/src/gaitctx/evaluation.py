"""Cross-validation plans, binary classification metrics and campaign reports."""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dmo_features import ZScoreScaler
from .errors import InvalidInput
from .tabular_classifiers import TABULAR_MODELS, TabularDataset
from .tsc.datasets import SeriesDataset
from .tsc.models import FIXED_LENGTH_MODELS, SERIES_MODELS, make_series_model

SCHEMA_VERSION = 1
METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


# -- fold plans ----------------------------------------------------------------

@dataclass(frozen=True)
class FoldPlan:
    strategy: str
    folds: list[tuple[np.ndarray, np.ndarray]]
    seed: int | None = None
    names: list[str] = field(default_factory=list)
    degenerate: list[bool] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.folds)

    @property
    def n_samples(self) -> int:
        return sum(len(test) for _, test in self.folds)

    def describe(self) -> dict:
        return {"strategy": self.strategy, "n_folds": len(self.folds), "seed": self.seed,
                "names": list(self.names), "degenerate": list(self.degenerate)}


def _plan(strategy, test_sets, n, seed=None, names=None, degenerate=None) -> FoldPlan:
    everything = np.arange(n)
    folds = []
    for test in test_sets:
        test = np.sort(np.asarray(test, dtype=int))
        folds.append((np.setdiff1d(everything, test), test))
    names = names or [str(i) for i in range(len(folds))]
    return FoldPlan(strategy, folds, seed, list(names), list(degenerate or [False] * len(folds)))


def make_stratified_folds(labels, k: int = 5, seed: int | None = 0) -> FoldPlan:
    """Shuffle each class and deal its members round-robin over the folds.

    The dealing position carries over from one class to the next, which
    keeps fold sizes within one sample of each other as well.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise InvalidInput("k must be at least 2")
    classes, counts = np.unique(labels, return_counts=True)
    small = [(c, n) for c, n in zip(classes, counts) if n < k]
    if small:
        c, n = small[0]
        raise InvalidInput(f"class {c!r} has {n} members, fewer than k={k}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(labels), dtype=int)
    start = 0
    for c in classes:
        members = rng.permutation(np.flatnonzero(labels == c))
        assignment[members] = (start + np.arange(len(members))) % k
        start = (start + len(members)) % k
    return _plan("stratified_k", [np.flatnonzero(assignment == f) for f in range(k)],
                 len(labels), seed)


def _subject_order(subject):
    s = str(subject)
    return (0, int(s), s) if s.isdigit() else (1, 0, s)


def make_loso_folds(subjects, labels=None) -> FoldPlan:
    """One fold per subject; a fold whose test side has a single class is flagged."""
    subjects = np.asarray(subjects)
    unique = sorted(set(subjects.tolist()), key=_subject_order)
    if len(unique) < 2:
        raise InvalidInput("leave-one-subject-out needs at least two subjects")
    tests = [np.flatnonzero(subjects == s) for s in unique]
    degenerate = [False] * len(tests)
    if labels is not None:
        labels = np.asarray(labels)
        degenerate = [len(np.unique(labels[t])) < 2 for t in tests]
    return _plan("loso", tests, len(subjects), None, [str(s) for s in unique], degenerate)


def make_custom_folds(test_sets: Sequence[Sequence[int]], n: int) -> FoldPlan:
    """Folds from explicit test index sets, which must partition ``range(n)``."""
    flat = np.concatenate([np.asarray(t, dtype=int) for t in test_sets]) if test_sets else np.array([])
    if len(flat) != n or not np.array_equal(np.sort(flat), np.arange(n)):
        raise InvalidInput("custom test sets must partition the sample indices")
    return _plan("custom", test_sets, n)


def check_plan(plan: FoldPlan, subjects=None) -> None:
    """Raise if the folds leak: overlapping sides, non-partitioning tests, shared subjects."""
    n = plan.n_samples
    seen = np.concatenate([t for _, t in plan.folds])
    if not np.array_equal(np.sort(seen), np.arange(n)):
        raise InvalidInput("test sets do not partition the samples")
    for i, (train, test) in enumerate(plan.folds):
        if np.intersect1d(train, test).size:
            raise InvalidInput(f"fold {i}: train and test overlap")
        if plan.strategy == "loso" and subjects is not None:
            subjects = np.asarray(subjects)
            shared = set(subjects[train]) & set(subjects[test])
            if shared:
                raise InvalidInput(f"fold {i}: subject(s) {sorted(shared)} on both sides")


# -- metrics -------------------------------------------------------------------

def compute_metrics(y_true, y_pred, classes=None) -> dict:
    """Accuracy and macro precision/recall/F1 for one test set.

    Precision or recall with a zero denominator counts as 0 and is flagged.
    Classes that never occur in ``y_true`` are left out of the macro means
    (their recall is undefined); this only happens on single-class folds.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise InvalidInput(f"y_true has {len(y_true)} entries, y_pred has {len(y_pred)}")
    if len(y_true) == 0:
        raise InvalidInput("cannot score an empty test set")
    if classes is None:
        classes = np.unique(np.concatenate([y_true, y_pred]))
        if set(classes.tolist()) <= {0, 1}:
            classes = np.array([0, 1])
    classes = list(np.asarray(classes).tolist())
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(y_true.tolist(), y_pred.tolist()):
        confusion[index[t], index[p]] += 1

    flags = []
    precision, recall, f1 = [], [], []
    for i, c in enumerate(classes):
        support = confusion[i].sum()
        if support == 0:
            flags.append(f"class {c} absent from test labels; excluded from macro means")
            continue
        tp = confusion[i, i]
        predicted = confusion[:, i].sum()
        if predicted == 0:
            flags.append(f"class {c} never predicted; precision set to 0")
            p = 0.0
        else:
            p = tp / predicted
        r = tp / support
        precision.append(p)
        recall.append(r)
        f1.append(0.0 if p + r == 0 else 2 * p * r / (p + r))
    return {
        "accuracy": float(np.trace(confusion) / len(y_true)),
        "precision": float(math.fsum(precision) / len(precision)),
        "recall": float(math.fsum(recall) / len(recall)),
        "f1": float(math.fsum(f1) / len(f1)),
        "confusion": confusion.tolist(),
        "classes": classes,
        "n_test": int(len(y_true)),
        "flags": flags,
    }


def aggregate(fold_metrics: Sequence[dict]) -> dict:
    """Mean and population standard deviation of each metric over folds."""
    out = {}
    for name in METRIC_NAMES:
        values = np.array([m[name] for m in fold_metrics], dtype=np.float64)
        out[name] = {"mean": float(values.mean()), "std": float(values.std())}
    return out


# -- reports -------------------------------------------------------------------

@dataclass
class MetricsReport:
    campaign_id: str
    config: dict
    folds: list[dict]
    aggregate: dict
    schema_version: int = SCHEMA_VERSION

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(asdict(self), indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        data = json.loads(text)
        version = data.get("schema_version")
        if version != SCHEMA_VERSION:
            raise InvalidInput(f"unsupported report schema_version {version!r}")
        missing = {"campaign_id", "config", "folds", "aggregate"} - set(data)
        if missing:
            raise InvalidInput(f"report is missing field(s) {sorted(missing)}")
        return cls(**data)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "MetricsReport":
        with open(path) as fh:
            return cls.from_json(fh.read())


def format_cell(mean: float, std: float) -> str:
    return f"{100 * mean:.1f} ± {100 * std:.1f}"


def render_table(reports: Sequence[MetricsReport], label_keys=("model",)) -> str:
    """Aligned text table with one row per report and percentages as ``mean ± std``."""
    header = ["/".join(label_keys), "accuracy", "precision", "recall", "F1-score"]
    rows = []
    for r in reports:
        label = " ".join(str(r.config.get(k, "")) for k in label_keys).strip() or r.campaign_id
        rows.append([label] + [format_cell(r.aggregate[m]["mean"], r.aggregate[m]["std"])
                               for m in METRIC_NAMES])
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) if i == 0 else cell.rjust(w)
                       for i, (cell, w) in enumerate(zip(row, widths)))
             for row in [header] + rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


# -- campaigns -----------------------------------------------------------------

def checksum_arrays(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        if hasattr(a, "tocsr"):
            a = a.toarray()
        if isinstance(a, (list, tuple)):
            for x in a:
                h.update(np.ascontiguousarray(x).tobytes())
                h.update(b"|")
        else:
            h.update(np.ascontiguousarray(a).tobytes())
        h.update(b"#")
    return h.hexdigest()


class FitAudit:
    """Records a checksum of everything each fold's fit receives."""

    def __init__(self):
        self.records: list[dict] = []

    def __call__(self, fold: int, train_idx: np.ndarray, digest: str) -> None:
        self.records.append({"fold": fold, "train_idx": np.asarray(train_idx), "digest": digest})


def model_family(name: str) -> str:
    if name in TABULAR_MODELS:
        return "tabular"
    if name in SERIES_MODELS:
        return "series"
    raise InvalidInput(f"unknown model {name!r}; choose from "
                       f"{sorted(TABULAR_MODELS) + sorted(SERIES_MODELS)}")


def check_compatible(dataset, model: str) -> None:
    family = model_family(model)
    if family == "tabular" and not isinstance(dataset, TabularDataset):
        raise InvalidInput(f"model {model!r} needs a tabular (DMO) dataset")
    if family == "series":
        if not isinstance(dataset, SeriesDataset):
            raise InvalidInput(f"model {model!r} needs a series dataset")
        if model in FIXED_LENGTH_MODELS and dataset.length_mode != "fixed":
            raise InvalidInput(f"model {model!r} needs equal-length series; "
                               "use length mode pad or resample")


def _series_zscore(data: SeriesDataset) -> SeriesDataset:
    from .core_signal import zscore
    return SeriesDataset([zscore(x).values for x in data.series], data.y, data.subjects,
                         data.length_mode, data.keys)


def _run_fold(dataset, model, params, normalization, train, test, features):
    """Fit on ``train`` only and predict ``test``; returns (predictions, digest, summary)."""
    if model_family(model) == "tabular":
        tr, te = dataset.subset(train), dataset.subset(test)
        if normalization == "zscore":
            scaler = ZScoreScaler().fit(tr.X)
            tr, te = tr.with_X(scaler.transform(tr.X)), te.with_X(scaler.transform(te.X))
        digest = checksum_arrays(tr.X, tr.y)
        fitted = TABULAR_MODELS[model](tr, **params)
        return fitted.predict(te.X), digest, fitted.summary()

    tr, te = dataset.subset(train), dataset.subset(test)
    est = make_series_model(model, **params)
    if features is not None:
        digest = checksum_arrays(features[train], tr.y)
        est.fit(tr, features=features[train])
        pred = est.predict(te, features=features[test])
    else:
        digest = checksum_arrays(tr.series, tr.y)
        est.fit(tr)
        pred = est.predict(te)
    return pred, digest, est.summary()


def run_campaign(dataset, model: str, plan: FoldPlan, normalization: str = "none",
                 params: dict | None = None, campaign_id: str | None = None,
                 config: dict | None = None, audit: Callable | None = None,
                 jobs: int = 1) -> MetricsReport:
    """Cross-validate ``model`` on ``dataset`` following ``plan``.

    Everything a model learns (normalization statistics, MiniROCKET biases,
    SFA breakpoints, vocabularies) is fitted inside each fold on its training
    side.  ``audit`` is called with ``(fold, train_idx, digest)`` where
    ``digest`` hashes the exact arrays handed to the fit.
    """
    params = dict(params or {})
    check_compatible(dataset, model)
    if normalization not in ("none", "zscore"):
        raise InvalidInput(f"normalization must be 'none' or 'zscore', got {normalization!r}")
    if plan.n_samples != len(dataset):
        raise InvalidInput(f"fold plan covers {plan.n_samples} samples, dataset has {len(dataset)}")

    if isinstance(dataset, SeriesDataset) and normalization == "zscore":
        # per-series scaling uses no statistics from other samples
        dataset = _series_zscore(dataset)

    features = None
    if model_family(model) == "series" and SERIES_MODELS[model].stateless_transform:
        # the kernel bank depends only on the seed and series length
        features = make_series_model(model, **params).transform(dataset)

    args = [(dataset, model, params, normalization, tr, te, features) for tr, te in plan.folds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_fold, *zip(*args)))
    else:
        results = [_run_fold(*a) for a in args]

    fold_metrics = []
    for i, ((train, test), (pred, digest, summary)) in enumerate(zip(plan.folds, results)):
        if audit is not None:
            audit(i, train, digest)
        m = compute_metrics(dataset.y[test], pred)
        m.update({"fold": i, "name": plan.names[i] if plan.names else str(i),
                  "degenerate": bool(plan.degenerate[i]) if plan.degenerate else False,
                  "train_digest": digest, "model": _jsonable(summary)})
        fold_metrics.append(m)

    classes, counts = np.unique(dataset.y, return_counts=True)
    snapshot = {
        "model": model,
        "params": _jsonable(params),
        "normalization": normalization,
        "plan": plan.describe(),
        "n_samples": len(dataset),
        "class_counts": {str(c): int(n) for c, n in zip(classes, counts)},
    }
    snapshot.update(_jsonable(config or {}))
    cid = campaign_id or f"{model}-{plan.strategy}"
    return MetricsReport(cid, snapshot, fold_metrics, aggregate(fold_metrics))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
