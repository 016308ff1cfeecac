"""Binary relevance (BR) and label-pairwise (LPW) ensembles with optional
SCM / BMC correction of every member, plus S-Cut threshold selection."""
import enum
import hashlib
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import base
from .bmc import BMCModel
from .datamodel import br_transform, kfold_indices, lpw_transform
from .scm import SCMModel, build_archive

DEFAULT_BETA_GRID = tuple(2.0 + 0.9 * i for i in range(11))


class CorrectionKind(str, enum.Enum):
    NONE = "none"
    SCM = "scm"
    BMC = "bmc"


def derive_seed(seed, *coords):
    """Stable 32-bit seed from a root seed and any printable coordinates."""
    key = json.dumps([seed, *coords], default=str).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:4], "little")


@dataclass(frozen=True)
class BaseSpec:
    """Base learner kind, fixed parameters and an optional tuning grid."""
    kind: str
    params: dict = field(default_factory=dict)
    grid: list = None
    folds: int = 3

    def learner_for(self, bds, seed):
        if not self.grid:
            return base.make_learner(self.kind, **self.params)
        spec = base.TuningSpec([dict(self.params, **g) for g in self.grid], self.folds)
        return base.tune_learner(self.kind, bds, spec, seed)


def _wrap(correction, learner, archive, full_model):
    if correction == CorrectionKind.SCM:
        return SCMModel(full_model, archive)
    return BMCModel(full_model, archive)


def select_beta(learner, bds, correction, grid, seed, folds=3):
    """Neighbourhood scale maximizing mean minority-class F1 over ``folds``.

    The archive does not depend on beta, so each fold builds it once and
    scores every grid value. Ties go to the earlier grid value.
    """
    grid = list(grid)
    if len(grid) == 1 or len(bds) < 2 * folds:
        return grid[0]
    minority = base.minority_class(bds.y)
    split = kfold_indices(len(bds), folds, seed)
    scores = np.zeros(len(grid))
    for i, test in enumerate(split):
        train = bds.subset(np.concatenate([f for j, f in enumerate(split) if j != i]))
        archive = build_archive(learner, train, grid[0], derive_seed(seed, "archive", i))
        wrapped = _wrap(correction, learner, archive, learner.train(train))
        for g, pred in enumerate(wrapped.decide_grid(bds.X[test], grid)):
            scores[g] += base.minority_f1(bds.y[test], pred, minority)
    return grid[int(np.argmax(scores))]


def train_member(bds, base_spec, correction, beta, seed):
    """One (possibly corrected) binary model and a summary of its settings."""
    correction = CorrectionKind(correction)
    learner = base_spec.learner_for(bds, derive_seed(seed, "tune"))
    info = {"params": dict(getattr(learner, "__dict__", {}))}
    if correction == CorrectionKind.NONE or len(bds) < 2:
        if correction != CorrectionKind.NONE:
            warnings.warn(f"member {bds.origin}: too few instances for correction")
        return learner.train(bds), info
    if np.ndim(beta) > 0:
        beta = select_beta(learner, bds, correction, beta, derive_seed(seed, "beta"))
    archive = build_archive(learner, bds, float(beta), derive_seed(seed, "archive"))
    info["beta"] = float(beta)
    return _wrap(correction, learner, archive, learner.train(bds)), info


@dataclass
class MultiLabelClassifier:
    kind: str
    n_labels: int
    members: list
    tags: list
    thresholds: np.ndarray
    abstain_pairs: list = field(default_factory=list)
    member_info: list = field(default_factory=list)
    correction: str = "none"

    def soft_output(self, X):
        X, single = base._as_batch(X)
        n, L = X.shape[0], self.n_labels
        if self.kind == "BR":
            omega = np.column_stack([m.support(X)[:, 1] for m in self.members])
        else:
            votes = np.zeros((n, L))
            for m, (i, j) in zip(self.members, self.tags):
                if m is None:
                    continue
                first = m.decide(X) == 1
                votes[:, i] += first
                votes[:, j] += ~first
            omega = votes / (L - 1)
        return omega[0] if single else omega

    def predict(self, X):
        return (self.soft_output(X) >= self.thresholds).astype(np.int8)

    def summary(self):
        return {
            "kind": self.kind,
            "correction": self.correction,
            "member_count": len(self.members),
            "members": [{"tag": list(t), **info} for t, info in zip(self.tags, self.member_info)],
            "thresholds": [float(t) for t in self.thresholds],
            "abstain_pairs": [list(p) for p in self.abstain_pairs],
        }


def _member_tags(kind, L):
    if kind == "BR":
        return [(l,) for l in range(L)]
    if kind == "LPW":
        return [(i, j) for i in range(L) for j in range(i + 1, L)]
    raise ValueError(f"unknown transformation {kind!r}")


def fit_members(ds, kind, base_spec, correction, beta, seed):
    """Train every ensemble member; LPW pairs without data abstain."""
    members, infos, abstain = [], [], []
    tags = _member_tags(kind, ds.n_labels)
    for tag in tags:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            bds = br_transform(ds, tag[0]) if kind == "BR" else lpw_transform(ds, *tag)
        if bds.empty:
            members.append(None)
            infos.append({"abstain": True})
            abstain.append(tag)
            continue
        model, info = train_member(bds, base_spec, correction, beta, derive_seed(seed, *tag))
        members.append(model)
        infos.append(info)
    return members, tags, infos, abstain


def train_ml(ds, kind, base_spec, correction="none", beta=DEFAULT_BETA_GRID, seed=0,
             scut_folds=3):
    """Train a BR or LPW classifier.

    ``beta`` is a fixed neighbourhood scale or a grid searched per member.
    Thresholds come from S-Cut over ``scut_folds``-fold internal
    cross-validated soft outputs; ``scut_folds=None`` uses 0.5 everywhere.
    """
    if ds.n_labels < 2:
        raise ValueError("multi-label training needs at least two labels")
    if isinstance(base_spec, str):
        base_spec = BaseSpec(base_spec)
    correction = CorrectionKind(correction)
    members, tags, infos, abstain = fit_members(ds, kind, base_spec, correction, beta, seed)
    clf = MultiLabelClassifier(kind, ds.n_labels, members, tags, np.full(ds.n_labels, 0.5),
                               abstain, infos, correction.value)
    if scut_folds:
        soft = cv_soft_outputs(ds, kind, base_spec, correction, beta, seed, scut_folds)
        clf.thresholds = scut_fit(soft, ds.Y)
    return clf


def cv_soft_outputs(ds, kind, base_spec, correction, beta, seed, folds):
    """Out-of-fold ensemble soft outputs for threshold fitting."""
    soft = np.zeros(ds.Y.shape)
    split = kfold_indices(len(ds), min(folds, len(ds)), derive_seed(seed, "scut"))
    for i, test in enumerate(split):
        train = ds.subset(np.concatenate([f for j, f in enumerate(split) if j != i]))
        members, tags, _, _ = fit_members(train, kind, base_spec, correction, beta,
                                          derive_seed(seed, "scut", i))
        inner = MultiLabelClassifier(kind, ds.n_labels, members, tags, np.zeros(ds.n_labels))
        soft[test] = inner.soft_output(ds.X[test])
    return soft


def scut_fit(soft, truth):
    """Per-label threshold maximizing binary F1 of the given soft outputs.

    Candidates are 0, 1, every distinct soft value and the midpoints between
    consecutive values; ties go to the smallest threshold. Labels without
    positives get threshold 1.
    """
    soft = np.asarray(soft, dtype=float)
    truth = np.asarray(truth).astype(bool)
    if soft.ndim == 1:
        soft, truth = soft[:, None], truth[:, None]
    thresholds = np.empty(soft.shape[1])
    for l in range(soft.shape[1]):
        t = truth[:, l]
        if not t.any():
            thresholds[l] = 1.0
            continue
        values = np.unique(soft[:, l])
        cands = np.unique(np.concatenate([[0.0, 1.0], values,
                                          0.5 * (values[1:] + values[:-1])]))
        cands = cands[(cands >= 0.0) & (cands <= 1.0)]
        pred = soft[None, :, l] >= cands[:, None]
        tp = (pred & t).sum(axis=1)
        fp = (pred & ~t).sum(axis=1)
        fn = (~pred & t).sum(axis=1)
        f1 = base.metrics.f1_score(tp, fp, fn)
        thresholds[l] = cands[int(np.argmax(f1))]
    return thresholds


def soft_output(x, clf):
    return clf.soft_output(x)


def predict(x, clf):
    return clf.predict(x)
