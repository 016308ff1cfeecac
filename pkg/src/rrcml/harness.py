"""Configuration-driven experiment runner.

For every dataset x transformation x base classifier x correction the
dataset is split by outer k-fold cross-validation. Inside each training
fold, nominal features are one-hot encoded, features standardized, base
parameters and beta tuned per ensemble member, archives built from two-fold
responses and thresholds fitted by S-Cut; the outer test fold is only used
for evaluation.
"""
import csv
import json
import logging
import os
import tempfile
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import datamodel
from .metrics import CRITERIA, direction, evaluate_all
from .multilabel import DEFAULT_BETA_GRID, BaseSpec, derive_seed, train_ml
from .stats import (ResultMatrix, average_ranks, format_rank_tables, rank_tables_csv,
                    two_step_pipeline)

log = logging.getLogger(__name__)

RUN_FIELDS = ["dataset", "transform", "base", "correction", "fold", *CRITERIA,
              "beta_min", "beta_median", "beta_max", "error"]


@dataclass
class ExperimentConfig:
    datasets: list
    base_classifiers: list
    corrections: list = field(default_factory=lambda: ["none", "scm", "bmc"])
    transforms: list = field(default_factory=lambda: ["BR", "LPW"])
    outer_folds: int = 10
    scut_folds: int = 3
    beta_grid: list = field(default_factory=lambda: list(DEFAULT_BETA_GRID))
    seed: int = 0
    output: str = "results"
    jobs: int = 1

    def __post_init__(self):
        if not self.datasets or not self.base_classifiers or not self.corrections:
            raise ValueError("config needs datasets, base classifiers and corrections")
        if not self.transforms:
            raise ValueError("config needs at least one transformation")
        if any(b <= 0 for b in self.beta_grid):
            raise ValueError("beta grid values must be positive")
        bad = set(self.corrections) - {"none", "scm", "bmc"}
        if bad:
            raise ValueError(f"unknown corrections {sorted(bad)}")
        bad = set(self.transforms) - {"BR", "LPW"}
        if bad:
            raise ValueError(f"unknown transformations {sorted(bad)}")

    @classmethod
    def from_file(cls, path, **overrides):
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


@dataclass
class RunRecord:
    dataset: str
    transform: str
    base: str
    correction: str
    fold: int
    report: dict
    wall_time: float
    betas: list = field(default_factory=list)
    error: str = ""

    def row(self):
        betas = np.array(self.betas) if self.betas else None
        stats = ([f"{betas.min():.2f}", f"{np.median(betas):.2f}", f"{betas.max():.2f}"]
                 if betas is not None else ["", "", ""])
        vals = [repr(float(self.report[c])) if self.report else "" for c in CRITERIA]
        return [self.dataset, self.transform, self.base, self.correction, self.fold,
                *vals, *stats, self.error]


def _base_spec(entry):
    if isinstance(entry, str):
        return BaseSpec(entry)
    return BaseSpec(entry["kind"], entry.get("params", {}), entry.get("grid"),
                    entry.get("folds", 3))


def base_name(entry):
    return entry if isinstance(entry, str) else entry.get("name", entry["kind"])


def load_from_entry(entry):
    """A dataset config entry is a path, ``{"path", "format", "labels"}`` or
    ``{"synthetic": {...SynthSpec fields}, "seed": int, "name": str}``."""
    if isinstance(entry, str):
        fmt = "arff-ml" if entry.endswith(".arff") else "csv-ml"
        return datamodel.load_dataset(entry, fmt)
    if "synthetic" in entry:
        ds, _ = datamodel.synth_generate(datamodel.SynthSpec(**entry["synthetic"]),
                                         entry.get("seed", 0))
        return datamodel.MultiLabelDataset(ds.X, ds.Y, ds.features, ds.label_names,
                                           name=entry.get("name", ds.name))
    return datamodel.load_dataset(entry["path"], entry.get("format", "csv-ml"),
                                  entry.get("labels"))


def prepare_fold(train, test):
    """One-hot nominal features, then standardize with training statistics only."""
    train = datamodel.binarize_nominal(train)
    test = datamodel.binarize_nominal(test)
    params = datamodel.fit_standardization(train)
    return (datamodel.apply_standardization(train, params),
            datamodel.apply_standardization(test, params))


def run_cell(ds, transform, base_entry, correction, fold, train_idx, test_idx, cfg_seed,
             scut_folds, beta_grid):
    """Train and evaluate one method on one outer fold."""
    seed = derive_seed(cfg_seed, ds.name, transform, base_name(base_entry), fold)
    start = time.perf_counter()
    try:
        train, test = prepare_fold(ds.subset(train_idx), ds.subset(test_idx))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            clf = train_ml(train, transform, _base_spec(base_entry), correction,
                           beta=tuple(beta_grid), seed=seed, scut_folds=scut_folds)
            pred = clf.predict(test.X)
        report = evaluate_all(pred, test.Y).as_dict()
        betas = [m["beta"] for m in clf.member_info if "beta" in m]
        error = ""
    except Exception as exc:  # a failing cell must not abort the sweep
        log.exception("run failed: %s %s %s %s fold %d", ds.name, transform,
                      base_name(base_entry), correction, fold)
        report, betas, error = {}, [], f"{type(exc).__name__}: {exc}"
    return RunRecord(ds.name, transform, base_name(base_entry), correction, fold, report,
                     time.perf_counter() - start, betas, error)


def _run_cell_star(args):
    return run_cell(*args)


def experiment_cells(cfg):
    for entry in cfg.datasets:
        ds = load_from_entry(entry)
        folds = datamodel.kfold_indices(len(ds), cfg.outer_folds,
                                        derive_seed(cfg.seed, ds.name, "outer"))
        for transform in cfg.transforms:
            for base_entry in cfg.base_classifiers:
                for correction in cfg.corrections:
                    for f, test in enumerate(folds):
                        train = np.concatenate([t for g, t in enumerate(folds) if g != f])
                        yield (ds, transform, base_entry, correction, f, np.sort(train), test,
                               cfg.seed, cfg.scut_folds, cfg.beta_grid)


def run_experiment(cfg, write=True):
    """Run every cell of the configured sweep; optionally emit reports."""
    cells = list(experiment_cells(cfg))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_run_cell_star, cells))
    else:
        records = [run_cell(*c) for c in cells]
    if write:
        emit_reports(records, cfg.output, cfg)
    return records


CORRECTION_ORDER = ("none", "scm", "bmc")


def _record_key(r):
    return (r.dataset, r.transform, r.base, r.correction, r.fold)


def aggregate(records):
    """Fold-mean scores as ``{(transform, base): [ResultMatrix per criterion]}``.

    Algorithms are the corrections (in the order none, scm, bmc), datasets
    the rows. The result does not depend on record order. Raises
    ``ValueError`` listing every (dataset, method) cell without successful
    runs.
    """
    records = sorted(records, key=_record_key)
    sums = {}
    for r in records:
        if r.error:
            continue
        key = (r.transform, r.base, r.dataset, r.correction)
        acc = sums.setdefault(key, [np.zeros(len(CRITERIA)), 0])
        acc[0] += np.array([r.report[c] for c in CRITERIA])
        acc[1] += 1
    groups = {}
    for r in records:
        g = groups.setdefault((r.transform, r.base), (set(), set()))
        g[0].add(r.dataset)
        g[1].add(r.correction)
    out = {}
    gaps = []
    for (transform, base), (dsets, corrs) in sorted(groups.items()):
        datasets = sorted(dsets)
        algorithms = sorted(corrs, key=lambda c: (CORRECTION_ORDER.index(c)
                                                  if c in CORRECTION_ORDER else 3, c))
        values = np.full((len(CRITERIA), len(datasets), len(algorithms)), np.nan)
        for i, d in enumerate(datasets):
            for j, a in enumerate(algorithms):
                acc = sums.get((transform, base, d, a))
                if acc is None:
                    gaps.append((d, f"{transform}-{base}-{a}"))
                else:
                    values[:, i, j] = acc[0] / acc[1]
        out[(transform, base)] = [
            ResultMatrix(values[c], direction(name), tuple(algorithms), tuple(datasets), name)
            for c, name in enumerate(CRITERIA)]
    if gaps:
        raise ValueError(f"missing results for {gaps}")
    return out


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_reports(records, out_dir, cfg=None, alpha=0.05):
    """Write runs.csv, timings.csv, rank tables, radar.csv and a config echo.

    Files are first written to a temporary directory and moved into place
    only after every report has been produced.
    """
    if not records:
        raise ValueError("no run records to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(records, key=_record_key)
    with tempfile.TemporaryDirectory(dir=out_dir) as tmp:
        tmp = Path(tmp)
        _write_csv(tmp / "runs.csv", RUN_FIELDS, [r.row() for r in ordered])
        _write_csv(tmp / "timings.csv", ["dataset", "transform", "base", "correction", "fold",
                                         "seconds"],
                   [[r.dataset, r.transform, r.base, r.correction, r.fold,
                     f"{r.wall_time:.3f}"] for r in ordered])
        radar = []
        for (transform, base), mats in aggregate(records).items():
            stem = f"ranks_{transform}_{base}"
            if mats[0].values.shape[0] >= 2:
                tables = two_step_pipeline(mats, alpha)
                title = f"{transform} / {base}\n"
                (tmp / f"{stem}.txt").write_text(title + format_rank_tables(tables),
                                                 encoding="utf-8")
                (tmp / f"{stem}.csv").write_text(rank_tables_csv(tables), encoding="utf-8")
            else:
                log.warning("%s/%s: fewer than two datasets; rank tables skipped",
                            transform, base)
            for m in mats:
                radar.append([transform, base, m.criterion,
                              *[f"{r:.6f}" for r in average_ranks(m)]])
            radar_header = ["transform", "base", "criterion", *mats[0].algorithms]
        _write_csv(tmp / "radar.csv", radar_header, radar)
        if cfg is not None:
            (tmp / "config.json").write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True)
                                             + "\n", encoding="utf-8")
        written = []
        for f in sorted(tmp.iterdir()):
            os.replace(f, out_dir / f.name)
            written.append(out_dir / f.name)
    return written


def read_runs(path):
    """Load run records back from a runs.csv file."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            report = {c: float(row[c]) for c in CRITERIA} if not row["error"] else {}
            betas = [float(row[k]) for k in ("beta_min", "beta_median", "beta_max") if row[k]]
            records.append(RunRecord(row["dataset"], row["transform"], row["base"],
                                     row["correction"], int(row["fold"]), report, 0.0,
                                     betas, row["error"]))
    return records
