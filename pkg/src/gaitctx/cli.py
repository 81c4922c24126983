"""Command-line pipeline: synth -> label -> segment -> dmo -> train-eval -> report.

Commands exchange plain CSV/JSON files.  The default output directory is
``$GAITCTX_OUTPUT_DIR`` (or ``./gaitctx-out``).  ``train-eval`` reads a
flat ``key = value`` config file whose entries any flag overrides.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .context_labeling import (DEFAULT_DIST_THRESHOLD_M, DEFAULT_GAP_THRESHOLD_S,
                               DEFAULT_PROXIMITY_M, DEFAULT_TIME_THRESHOLD_S, detect_staypoints,
                               label_stream, read_gps_csv, read_label_csv, write_label_csv)
from .core_signal import read_imu_csv
from .dmo_features import (aggregate_all_windows, extract_basic_dmos, import_dmo_table,
                           records_to_dataset, write_dmo_table)
from .errors import GaitCtxError, InvalidInput
from .evaluation import (MetricsReport, make_loso_folds, make_stratified_folds, model_family,
                         render_table, run_campaign)
from .gait_segmentation import (chunk_windows, import_bout_annotations, read_window_labels,
                                segment_stream, write_bout_annotations, write_window_labels)
from .synthetic_data import generate_scenario, table_iii_config, uniform_config, write_scenario
from .tsc.datasets import (build_series_dataset, conform_length,
                           read_series_csv, write_series_csv)
from .tsc.models import FIXED_LENGTH_MODELS

OUTPUT_ENV = "GAITCTX_OUTPUT_DIR"
CHANNELS = ("vertical", "magnitude")
FILE_PREFIXES = ("imu_", "gps_", "labels_", "truth_")


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "gaitctx-out"))


def subject_from_path(path) -> str:
    stem = Path(path).stem
    for prefix in FILE_PREFIXES:
        if stem.startswith(prefix):
            return stem[len(prefix):]
    return stem


# -- run configuration -------------------------------------------------------

@dataclass
class RunConfig:
    model: str = "gnb"
    dataset: str = "windows"
    channel: str = "magnitude"
    length_mode: str = "pad"
    normalization: str = "none"
    folds: str = "stratified"
    k: int = 5
    seed: int = 0
    jobs: int = 1
    input_dir: str = "."
    output_dir: str = ""
    campaign_id: str = ""
    params: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        def bad(name, msg):
            raise InvalidInput(f"config field {name!r}: {msg}")

        try:
            family = model_family(self.model)
        except InvalidInput as exc:
            bad("model", str(exc))
        if self.dataset not in ("windows", "bouts"):
            bad("dataset", f"expected windows or bouts, got {self.dataset!r}")
        if self.channel not in CHANNELS:
            bad("channel", f"expected one of {CHANNELS}, got {self.channel!r}")
        if self.length_mode not in ("pad", "resample", "original"):
            bad("length_mode", f"expected pad, resample or original, got {self.length_mode!r}")
        if self.normalization not in ("none", "zscore"):
            bad("normalization", f"expected none or zscore, got {self.normalization!r}")
        if self.folds not in ("stratified", "loso"):
            bad("folds", f"expected stratified or loso, got {self.folds!r}")
        if self.k < 2:
            bad("k", "needs at least 2 folds")
        if self.jobs < 1:
            bad("jobs", "must be positive")
        if family == "series" and self.length_mode == "original" and self.model in FIXED_LENGTH_MODELS:
            bad("length_mode", f"model {self.model!r} needs equal-length series; "
                               "use pad or resample")
        return self

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        cfg = cls()
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name.startswith("param."):
                cfg.params[name[len("param."):]] = _coerce(raw)
                continue
            if name not in known:
                raise InvalidInput(f"unknown config field {key!r}")
            default = getattr(cls(), name)
            try:
                value = type(default)(raw) if not isinstance(default, dict) else raw
            except (TypeError, ValueError):
                raise InvalidInput(f"config field {key!r}: cannot parse {raw!r}") from None
            setattr(cfg, name, value)
        return cfg


def _coerce(text):
    if not isinstance(text, str):
        return text
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text.lower() in ("none", "null"):
        return None
    return text


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInput(f"{path}: line {lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return values


# -- commands ------------------------------------------------------------------

def cmd_synth(args) -> int:
    extra = {}
    if args.silent_fraction is not None:
        extra["silent_indoor_fraction"] = args.silent_fraction
    if args.preset == "table3":
        cfg = table_iii_config(scale=args.scale, seed=args.seed, **extra)
    else:
        cfg = uniform_config(args.subjects, args.indoor_s, args.outdoor_s, seed=args.seed, **extra)
    scenarios = generate_scenario(cfg)
    out = Path(args.out or default_output_dir())
    written = write_scenario(out, scenarios)
    total = sum(len(sc.truth) for sc in scenarios)
    indoor = sum(int(sc.truth.sum()) for sc in scenarios)
    print(f"wrote {len(written)} files for {len(scenarios)} subjects to {out} "
          f"({total} s, indoor share {indoor / total:.3f})")
    return 0


def cmd_label(args) -> int:
    out = Path(args.out or default_output_dir())
    out.mkdir(parents=True, exist_ok=True)
    imu = {subject_from_path(p): p for p in args.imu or []}
    for path in args.gps:
        sid = subject_from_path(path)
        track = read_gps_csv(path, sid)
        t0 = duration = None
        if sid in imu:
            stream = read_imu_csv(imu[sid], sid)
            t0, duration = stream.start_time, int(np.floor(stream.duration_s))
        staypoints = detect_staypoints(track, args.dist, args.time, args.gap)
        labels = label_stream(track, staypoints, args.proximity, t0, duration)
        write_label_csv(out / f"labels_{sid}.csv", labels)
        print(f"subject {sid}: {len(staypoints)} staypoints, "
              f"indoor share {labels.probs.mean():.3f} over {len(labels)} s")
    return 0


def _paired(imu_paths, other_paths, what):
    others = {subject_from_path(p): p for p in other_paths}
    pairs = []
    for p in imu_paths:
        sid = subject_from_path(p)
        if sid not in others:
            raise InvalidInput(f"no {what} file for subject {sid!r}")
        pairs.append((sid, p, others[sid]))
    return pairs


def cmd_segment(args) -> int:
    out = Path(args.out or default_output_dir())
    out.mkdir(parents=True, exist_ok=True)
    windows, bouts = [], []
    for sid, imu_path, label_path in _paired(args.imu, args.labels, "label"):
        stream = read_imu_csv(imu_path, sid)
        labels = read_label_csv(label_path, sid)
        w, b = segment_stream(stream, labels, args.window_len, args.axis)
        windows.extend(w)
        bouts.extend(b)
    write_window_labels(out / "windows.csv", windows)
    write_bout_annotations(out / "bouts.csv", bouts)

    with_gait = {(b.subject_id, b.window.index) for b in bouts}
    gait_windows = [w for w in windows if (w.subject_id, w.index) in with_gait]
    labelled = [w for w in windows if w.label is not None]
    labelled_bouts = [b for b in bouts if b.label is not None]
    for channel in CHANNELS:
        for name, items in (("windows", gait_windows), ("bouts", labelled_bouts)):
            if any(it.label is not None for it in items):
                data = build_series_dataset(items, channel, args.axis, "original")
                write_series_csv(out / f"series_{name}_{channel}.csv", data)
    print(f"windows: {len(windows)} total, {len(labelled)} labelled, "
          f"{sum(w.label is not None for w in gait_windows)} labelled with gait")
    print(f"bouts: {len(bouts)} total, {len(labelled_bouts)} in labelled windows")
    return 0


def cmd_dmo(args) -> int:
    out = Path(args.out or default_output_dir())
    out.mkdir(parents=True, exist_ok=True)
    labels = read_window_labels(args.windows)
    if args.table:
        records = import_dmo_table(args.table)
        for r in records:
            if r.label is None:
                r.label = labels.get((r.subject, r.window_index), (None, None))[0]
    else:
        windows = []
        for path in args.imu:
            sid = subject_from_path(path)
            for w in chunk_windows(read_imu_csv(path, sid), args.window_len):
                w.label = labels.get((sid, w.index), (None, None))[0]
                windows.append(w)
        records = [extract_basic_dmos(b, axis=args.axis)
                   for b in import_bout_annotations(windows, args.bouts)]
    if not records:
        raise InvalidInput("no bouts to describe")
    window_records = aggregate_all_windows(records)
    write_dmo_table(out / "dmo_bouts.csv", records)
    write_dmo_table(out / "dmo_windows.csv", window_records)
    n_lab = sum(r.label is not None for r in window_records)
    print(f"DMO rows: {len(records)} bouts, {len(window_records)} windows ({n_lab} labelled)")
    return 0


def load_campaign_dataset(cfg: RunConfig):
    base = Path(cfg.input_dir)
    if model_family(cfg.model) == "tabular":
        path = base / f"dmo_{cfg.dataset}.csv"
        if not path.exists():
            raise InvalidInput(f"missing DMO table {path} (run the dmo command first)")
        return records_to_dataset(import_dmo_table(path))
    path = base / f"series_{cfg.dataset}_{cfg.channel}.csv"
    if not path.exists():
        raise InvalidInput(f"missing series set {path} (run the segment command first)")
    return conform_length(read_series_csv(path), cfg.length_mode)


def execute_run(cfg: RunConfig) -> MetricsReport:
    cfg.validate()
    data = load_campaign_dataset(cfg)
    if cfg.folds == "stratified":
        plan = make_stratified_folds(data.y, cfg.k, cfg.seed)
    else:
        plan = make_loso_folds(data.subjects, data.y)
    params = dict(cfg.params)
    if model_family(cfg.model) == "series" and cfg.model in ("rocket", "minirocket"):
        params.setdefault("seed", cfg.seed)
    snapshot = {k: v for k, v in asdict(cfg).items() if k not in ("output_dir", "jobs")}
    if model_family(cfg.model) == "tabular":
        # DMO tables have no signal channel or length handling
        snapshot.update(channel="n/a", length_mode="n/a")
    cid = cfg.campaign_id or f"{cfg.dataset}-{cfg.model}"
    return run_campaign(data, cfg.model, plan, cfg.normalization, params, cid,
                        {"run_config": snapshot}, jobs=cfg.jobs)


def cmd_train_eval(args) -> int:
    values = read_config_file(args.config) if args.config else {}
    for name in ("model", "dataset", "channel", "length_mode", "normalization", "folds", "k",
                 "seed", "jobs", "input_dir", "campaign_id"):
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    for item in args.param or []:
        if "=" not in item:
            raise InvalidInput(f"--param expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        values[f"param.{key.strip()}"] = value.strip()
    cfg = RunConfig.from_mapping(values)
    out = Path(args.out or default_output_dir())
    cfg.output_dir = str(out)
    report = execute_run(cfg)
    out.mkdir(parents=True, exist_ok=True)
    report.save(out / f"report_{report.campaign_id}.json")
    table = render_table([report], ("model",))
    (out / f"report_{report.campaign_id}.txt").write_text(table + "\n")
    print(table)
    return 0


def cmd_report(args) -> int:
    reports = [MetricsReport.load(p) for p in args.reports]
    keys = tuple(args.columns.split(",")) if args.columns else ("model",)
    for r in reports:
        # expose run-config fields to the label columns
        for k, v in r.config.get("run_config", {}).items():
            r.config.setdefault(k, v)
    table = render_table(reports, keys)
    if args.out:
        Path(args.out).write_text(table + "\n")
    print(table)
    return 0


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaitctx", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a seeded synthetic scenario")
    s.add_argument("--preset", choices=("table3", "uniform"), default="table3")
    s.add_argument("--scale", type=float, default=0.5, help="table3: seconds per reference window / 60")
    s.add_argument("--subjects", type=int, default=3)
    s.add_argument("--indoor-s", type=float, default=1800.0)
    s.add_argument("--outdoor-s", type=float, default=1800.0)
    s.add_argument("--silent-fraction", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("label", help="per-second indoor labels from GPS")
    s.add_argument("--gps", nargs="+", required=True)
    s.add_argument("--imu", nargs="*", help="align label span to these recordings")
    s.add_argument("--dist", type=float, default=DEFAULT_DIST_THRESHOLD_M)
    s.add_argument("--time", type=float, default=DEFAULT_TIME_THRESHOLD_S)
    s.add_argument("--gap", type=float, default=DEFAULT_GAP_THRESHOLD_S)
    s.add_argument("--proximity", type=float, default=DEFAULT_PROXIMITY_M)
    s.add_argument("--out")
    s.set_defaults(func=cmd_label)

    s = sub.add_parser("segment", help="windows, window labels, walking bouts and series sets")
    s.add_argument("--imu", nargs="+", required=True)
    s.add_argument("--labels", nargs="+", required=True)
    s.add_argument("--window-len", type=int, default=60)
    s.add_argument("--axis", choices=("x", "y", "z"), default="z")
    s.add_argument("--out")
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("dmo", help="bout and window DMO tables")
    s.add_argument("--windows", required=True, help="windows.csv from segment")
    s.add_argument("--bouts", help="bouts.csv from segment")
    s.add_argument("--imu", nargs="*", default=[])
    s.add_argument("--table", help="import an external bout DMO table instead")
    s.add_argument("--window-len", type=int, default=60)
    s.add_argument("--axis", choices=("x", "y", "z"), default="z")
    s.add_argument("--out")
    s.set_defaults(func=cmd_dmo)

    s = sub.add_parser("train-eval", help="cross-validate one model on one dataset")
    s.add_argument("--config")
    s.add_argument("--model")
    s.add_argument("--dataset", choices=("windows", "bouts"))
    s.add_argument("--channel", choices=CHANNELS)
    s.add_argument("--length", dest="length_mode", choices=("pad", "resample", "original"))
    s.add_argument("--norm", dest="normalization", choices=("none", "zscore"))
    s.add_argument("--folds", choices=("stratified", "loso"))
    s.add_argument("--k", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--jobs", type=int)
    s.add_argument("--input-dir")
    s.add_argument("--campaign-id")
    s.add_argument("--param", action="append", help="model parameter key=value")
    s.add_argument("--out")
    s.set_defaults(func=cmd_train_eval)

    s = sub.add_parser("report", help="render saved reports as one table")
    s.add_argument("reports", nargs="+")
    s.add_argument("--columns", help="comma-separated config keys for the row label")
    s.add_argument("--out")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GaitCtxError, FileNotFoundError) as exc:
        print(f"gaitctx {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
