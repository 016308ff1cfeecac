"""Multi-label datasets: ingestion, preprocessing, decomposition and splitting."""
import csv
import dataclasses
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import norm

LABEL_PREFIX = "label:"


class DatasetFormatError(ValueError):
    """Raised when a dataset file does not follow the declared format."""


@dataclass(frozen=True)
class FeatureMeta:
    name: str
    kind: str = "numeric"  # numeric | binary | nominal
    categories: tuple = ()

    def __post_init__(self):
        if self.kind not in ("numeric", "binary", "nominal"):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == "nominal" and len(self.categories) < 2:
            raise ValueError(f"nominal feature {self.name!r} needs >= 2 categories")


@dataclass(frozen=True, eq=False)
class MultiLabelDataset:
    """Feature matrix ``X`` (n, d) and label matrix ``Y`` (n, L) in {0, 1}.

    Nominal features are stored as the integer index of their category.
    ``rows`` holds each instance's row index in the dataset it was split
    from, so splits can be checked for leakage. Missing ``features`` or
    ``label_names`` default to numeric ``f0, f1, ...`` and ``y0, y1, ...``.
    """
    X: np.ndarray
    Y: np.ndarray
    features: tuple = None
    label_names: tuple = None
    name: str = "dataset"
    rows: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=np.int8)
        if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise ValueError("X and Y must be 2-D with matching row counts")
        if self.features is None:
            object.__setattr__(self, "features",
                               [FeatureMeta(f"f{j}") for j in range(X.shape[1])])
        if self.label_names is None:
            object.__setattr__(self, "label_names", [f"y{l}" for l in range(Y.shape[1])])
        if X.shape[1] != len(self.features) or Y.shape[1] != len(self.label_names):
            raise ValueError("metadata does not match matrix shapes")
        if not np.all(np.isfinite(X)):
            raise ValueError("feature values must be finite")
        if np.any((Y != 0) & (Y != 1)):
            raise ValueError("labels must be 0 or 1")
        rows = np.arange(X.shape[0]) if self.rows is None else np.asarray(self.rows)
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "label_names", tuple(self.label_names))
        object.__setattr__(self, "rows", rows)

    @property
    def n_instances(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def n_labels(self):
        return self.Y.shape[1]

    def __len__(self):
        return self.X.shape[0]

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return dataclasses.replace(self, X=self.X[idx], Y=self.Y[idx], rows=self.rows[idx])

    def with_features(self, X, features):
        return dataclasses.replace(self, X=X, features=tuple(features))


@dataclass(frozen=True, eq=False)
class BinaryDataset:
    """Single-label view of a multi-label dataset.

    ``origin`` is ``("BR", l)`` or ``("LPW", i, j)``. ``rows`` holds the row
    indices of the source dataset's original ordering.
    """
    X: np.ndarray
    y: np.ndarray
    origin: tuple = ()
    rows: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=np.int8)
        rows = np.arange(len(y)) if self.rows is None else np.asarray(self.rows)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.y)

    @property
    def empty(self):
        return len(self.y) == 0

    @property
    def class_counts(self):
        n1 = int(self.y.sum())
        return len(self.y) - n1, n1

    def subset(self, idx):
        idx = np.asarray(idx, dtype=int)
        return BinaryDataset(self.X[idx], self.y[idx], self.origin, self.rows[idx])


@dataclass(frozen=True)
class DatasetStats:
    name: str
    n_instances: int
    n_features: int
    n_labels: int
    cardinality: float
    unique_combinations: int
    mean_ir: float
    absent_labels: tuple = ()


@dataclass(frozen=True)
class StandardizationParams:
    mean: np.ndarray
    std: np.ndarray


# --------------------------------------------------------------------- loading

def _parse_float(text, lineno, col):
    try:
        return float(text)
    except ValueError:
        raise DatasetFormatError(f"line {lineno}, column {col}: cannot parse {text!r} "
                                 "as a number") from None


def _parse_label(text, lineno, col):
    text = text.strip()
    if text not in ("0", "1", "0.0", "1.0"):
        raise DatasetFormatError(f"line {lineno}, column {col}: label value {text!r} "
                                 "is not 0 or 1")
    return int(float(text))


def _load_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        label_cols = [i for i, h in enumerate(header) if h.startswith(LABEL_PREFIX)]
        feat_cols = [i for i, h in enumerate(header) if not h.startswith(LABEL_PREFIX)]
        if not label_cols:
            raise DatasetFormatError(f"{path}: no '{LABEL_PREFIX}' columns in header")
        raw = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasetFormatError(f"line {lineno}: expected {len(header)} fields, "
                                         f"got {len(row)}")
            raw.append((lineno, [c.strip() for c in row]))
    features, columns = [], []
    for i in feat_cols:
        cells = [r[i] for _, r in raw]
        try:
            columns.append([float(c) for c in cells])
            features.append(FeatureMeta(header[i]))
        except ValueError:
            cats = tuple(sorted(set(cells)))
            if len(cats) < 2:
                lineno = raw[0][0]
                _parse_float(cells[0], lineno, header[i])
            lookup = {c: k for k, c in enumerate(cats)}
            columns.append([float(lookup[c]) for c in cells])
            features.append(FeatureMeta(header[i], "nominal", cats))
    Y = [[_parse_label(r[i], lineno, header[i]) for i in label_cols] for lineno, r in raw]
    X = np.array(columns, dtype=float).T.reshape(len(raw), len(feat_cols))
    return MultiLabelDataset(X, np.array(Y, dtype=np.int8).reshape(len(raw), len(label_cols)),
                             features, [header[i][len(LABEL_PREFIX):] for i in label_cols],
                             name=Path(path).stem)


def _split_arff_row(line):
    return next(csv.reader([line], skipinitialspace=True, quotechar="'"))


def _load_arff(path, labels):
    attrs = []
    data = []
    relation = Path(path).stem
    in_data = False
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if in_data:
                data.append((lineno, [c.strip() for c in _split_arff_row(line)]))
            elif low.startswith("@relation"):
                relation = line.split(None, 1)[1].strip().strip("'\"")
            elif low.startswith("@attribute"):
                body = line.split(None, 1)[1].strip()
                if body.startswith(("'", '"')):
                    q = body[0]
                    end = body.index(q, 1)
                    name, rest = body[1:end], body[end + 1:].strip()
                else:
                    name, rest = body.split(None, 1)
                if rest.startswith("{"):
                    if not rest.endswith("}"):
                        raise DatasetFormatError(f"line {lineno}: unterminated category list")
                    cats = tuple(c.strip().strip("'\"") for c in rest[1:-1].split(","))
                    attrs.append((name, cats))
                elif rest.lower() in ("numeric", "real", "integer"):
                    attrs.append((name, None))
                else:
                    raise DatasetFormatError(f"line {lineno}: unsupported attribute type {rest!r}")
            elif low.startswith("@data"):
                in_data = True
            else:
                raise DatasetFormatError(f"line {lineno}: unexpected header line {line!r}")
    names = [a[0] for a in attrs]
    missing = [l for l in labels if l not in names]
    if missing:
        raise DatasetFormatError(f"label attributes not declared: {missing}")
    label_idx = [names.index(l) for l in labels]
    feat_idx = [i for i in range(len(attrs)) if i not in set(label_idx)]
    features = []
    for i in feat_idx:
        name, cats = attrs[i]
        if cats is None:
            features.append(FeatureMeta(name))
        elif set(cats) == {"0", "1"}:
            features.append(FeatureMeta(name, "binary", ("0", "1")))
        else:
            features.append(FeatureMeta(name, "nominal", cats))
    X = np.zeros((len(data), len(feat_idx)))
    Y = np.zeros((len(data), len(label_idx)), dtype=np.int8)
    for r, (lineno, row) in enumerate(data):
        if len(row) != len(attrs):
            raise DatasetFormatError(f"line {lineno}: expected {len(attrs)} fields, got {len(row)}")
        for c, i in enumerate(feat_idx):
            meta = features[c]
            if meta.kind == "numeric":
                X[r, c] = _parse_float(row[i], lineno, meta.name)
            else:
                value = row[i].strip("'\"")
                if value not in meta.categories:
                    raise DatasetFormatError(f"line {lineno}, column {meta.name}: "
                                             f"{value!r} not among {meta.categories}")
                X[r, c] = meta.categories.index(value) if meta.kind == "nominal" else float(value)
        for c, i in enumerate(label_idx):
            Y[r, c] = _parse_label(row[i], lineno, names[i])
    return MultiLabelDataset(X, Y, features, labels, name=relation)


def load_dataset(path, format="csv-ml", labels=None):
    """Read a multi-label dataset.

    Parameters
    ----------
    path : str or Path
        Dataset file.
    format : {"csv-ml", "arff-ml"}
        ``csv-ml`` marks label columns with a ``label:`` header prefix.
        ``arff-ml`` reads the label attribute names from ``labels``, which is
        either a list of names or the path of a text file with one name per
        line (default: the dataset path with suffix ``.labels``).
    """
    path = Path(path)
    if format == "csv-ml":
        return _load_csv(path)
    if format == "arff-ml":
        if labels is None:
            labels = path.with_suffix(".labels")
        if isinstance(labels, (str, Path)):
            labels = [l.strip() for l in Path(labels).read_text(encoding="utf-8").splitlines()
                      if l.strip()]
        return _load_arff(path, list(labels))
    raise ValueError(f"unknown dataset format {format!r}")


def _format_value(meta, v):
    if meta.kind == "nominal":
        return meta.categories[int(v)]
    if meta.kind == "binary":
        return str(int(v))
    return repr(float(v))


def write_dataset(ds, path, format="csv-ml"):
    """Write ``ds`` so that :func:`load_dataset` reproduces it exactly."""
    path = Path(path)
    if format == "csv-ml":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f.name for f in ds.features] + [LABEL_PREFIX + l for l in ds.label_names])
            for x, y in zip(ds.X, ds.Y):
                w.writerow([_format_value(m, v) for m, v in zip(ds.features, x)]
                           + [str(int(b)) for b in y])
    elif format == "arff-ml":
        lines = [f"@relation {ds.name}", ""]
        for f in ds.features:
            if f.kind == "numeric":
                lines.append(f"@attribute {f.name} numeric")
            else:
                lines.append(f"@attribute {f.name} {{{','.join(f.categories)}}}")
        lines += [f"@attribute {l} {{0,1}}" for l in ds.label_names]
        lines += ["", "@data"]
        for x, y in zip(ds.X, ds.Y):
            lines.append(",".join([_format_value(m, v) for m, v in zip(ds.features, x)]
                                  + [str(int(b)) for b in y]))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        path.with_suffix(".labels").write_text("\n".join(ds.label_names) + "\n",
                                               encoding="utf-8")
    else:
        raise ValueError(f"unknown dataset format {format!r}")


# --------------------------------------------------------------- preprocessing

def binarize_nominal(ds):
    """Replace every nominal feature with one-hot indicator columns."""
    if all(f.kind != "nominal" for f in ds.features):
        return ds
    cols, features = [], []
    for j, f in enumerate(ds.features):
        if f.kind == "nominal":
            codes = ds.X[:, j].astype(int)
            for k, cat in enumerate(f.categories):
                cols.append((codes == k).astype(float))
                features.append(FeatureMeta(f"{f.name}={cat}", "binary", ("0", "1")))
        else:
            cols.append(ds.X[:, j])
            features.append(f)
    X = np.column_stack(cols) if cols else np.zeros((ds.n_instances, 0))
    return ds.with_features(X, features)


def fit_standardization(ds):
    """Per-feature population mean and standard deviation."""
    return StandardizationParams(ds.X.mean(axis=0), ds.X.std(axis=0))


def apply_standardization(ds, params):
    """Standardize features; constant features map to 0."""
    std = params.std
    safe = np.where(std > 0, std, 1.0)
    X = np.where(std > 0, (ds.X - params.mean) / safe, 0.0)
    return ds.with_features(X, ds.features)


# ------------------------------------------------------------------ statistics

def compute_stats(ds):
    """Table-style summary: size, dimensionality, LC, UC and mean IR."""
    if ds.n_instances < 1:
        raise ValueError("statistics need at least one instance")
    counts = ds.Y.sum(axis=0).astype(float)
    present = counts > 0
    absent = tuple(np.flatnonzero(~present).tolist())
    if absent:
        warnings.warn(f"labels {absent} have no positive instances; excluded from IR")
    ir = float(np.mean(counts.max() / counts[present])) if present.any() else 1.0
    unique = len({row.tobytes() for row in ds.Y})
    return DatasetStats(ds.name, ds.n_instances, ds.n_features, ds.n_labels,
                        float(counts.sum() / ds.n_instances), unique, ir, absent)


def write_stats_report(stats, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "|S|", "d", "L", "LC", "UC", "IR"])
        for s in stats:
            w.writerow([s.name, s.n_instances, s.n_features, s.n_labels,
                        f"{s.cardinality:.2f}", s.unique_combinations, f"{s.mean_ir:.2f}"])


# ------------------------------------------------------------------- splitting

def kfold_indices(n, k, seed):
    """Shuffled k-fold partition of ``range(n)``; fold sizes differ by <= 1."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"cannot split {n} instances into {k} folds")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, k)]


def kfold_split(ds, k, seed):
    """List of ``(train, test)`` pairs covering ``ds`` once as test data."""
    folds = kfold_indices(len(ds), k, seed)
    out = []
    for i, test in enumerate(folds):
        train = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        out.append((ds.subset(train), ds.subset(test)))
    return out


def br_transform(ds, l):
    if not 0 <= l < ds.n_labels:
        raise IndexError(f"label index {l} out of range")
    return BinaryDataset(ds.X, ds.Y[:, l], ("BR", l), ds.rows)


def lpw_transform(ds, i, j):
    """Instances where exactly one of labels ``i``, ``j`` is relevant.

    The class bit is 1 when label ``i`` is the relevant one. An empty result
    is returned with ``empty == True`` and a warning.
    """
    if not 0 <= i < j < ds.n_labels:
        raise IndexError(f"invalid label pair ({i}, {j})")
    keep = ds.Y[:, i] != ds.Y[:, j]
    if not keep.any():
        warnings.warn(f"label pair ({i}, {j}) has no discriminating instances")
    return BinaryDataset(ds.X[keep], ds.Y[keep, i], ("LPW", i, j), ds.rows[keep])


# ------------------------------------------------------------------- synthetic

@dataclass(frozen=True)
class SynthSpec:
    """Generative parameters for :func:`synth_generate`.

    Labels come from a Gaussian copula: label ``l`` is relevant with
    probability ``prevalence[l]`` and latent scores share correlation
    ``dependency``. ``imbalance`` sets the first label's prevalence; the
    remaining labels interpolate linearly down to ``1 - imbalance``.
    Each label pattern is a Gaussian cluster centred at the sum of per-label
    offset vectors of length ``separation``, with isotropic ``noise``.
    """
    n: int = 500
    d: int = 5
    n_labels: int = 3
    dependency: float = 0.3
    imbalance: float = 0.7
    noise: float = 1.0
    separation: float = 3.0
    min_prevalence: float = None

    def prevalences(self):
        low = 1.0 - self.imbalance if self.min_prevalence is None else self.min_prevalence
        return np.linspace(self.imbalance, low, self.n_labels)


def synth_generate(spec, seed):
    """Deterministic synthetic multi-label dataset plus its generative parameters."""
    if spec.n < 1 or spec.n_labels < 2:
        raise ValueError("need n >= 1 and at least two labels")
    rng = np.random.default_rng(seed)
    L = spec.n_labels
    # equicorrelation matrix is positive definite for rho in (-1/(L-1), 1)
    rho = float(np.clip(spec.dependency, -1.0 / (L - 1) + 1e-3, 0.999))
    cov = (1.0 - rho) * np.eye(L) + rho * np.ones((L, L))
    latent = rng.multivariate_normal(np.zeros(L), cov, size=spec.n, method="cholesky")
    prev = spec.prevalences()
    Y = (latent < norm.ppf(prev)).astype(np.int8)
    offsets = rng.normal(size=(L, spec.d))
    offsets *= spec.separation / np.linalg.norm(offsets, axis=1, keepdims=True)
    X = (2 * Y - 1) @ offsets / 2.0 + spec.noise * rng.normal(size=(spec.n, spec.d))
    ds = MultiLabelDataset(X, Y, [FeatureMeta(f"f{j}") for j in range(spec.d)],
                           [f"l{l}" for l in range(L)], name=f"synth{seed}")
    params = dict(dataclasses.asdict(spec), seed=seed, prevalences=prev.tolist(),
                  label_offsets=offsets.tolist())
    return ds, params
