"""Binary soft classifiers that emit support pairs ``(nu0, nu1)``.

Learners are small configuration objects whose ``train`` method returns an
immutable trained model. Trained models expose ``support(X)`` and
``decide(X)``; both accept a single feature vector or a 2-D batch.
Ties in ``decide`` go to class 1.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from . import metrics
from .datamodel import kfold_indices


def _as_batch(X):
    X = np.asarray(X, dtype=float)
    return (X[None, :], True) if X.ndim == 1 else (X, False)


class TrainedModel:
    """Common prediction surface of every trained binary model."""

    params = {}

    def _support(self, X):
        raise NotImplementedError

    def support(self, X):
        X, single = _as_batch(X)
        s = self._support(X)
        return s[0] if single else s

    def decide(self, X):
        s = self.support(X)
        return (s[..., 1] >= s[..., 0]).astype(int)


class ConstantModel(TrainedModel):
    """Returns the same support everywhere (prior-only fallback)."""

    def __init__(self, support):
        self.value = np.asarray(support, dtype=float)

    def _support(self, X):
        return np.tile(self.value, (X.shape[0], 1))


def prior_only(ds):
    n0, n1 = ds.class_counts
    if n0 + n1 == 0:
        return ConstantModel([0.5, 0.5])
    return ConstantModel([n0 / (n0 + n1), n1 / (n0 + n1)])


# ------------------------------------------------------------------------ kNN

def _sq_distances(A, B, chunk_cells=4_000_000):
    """Exact squared Euclidean distances, computed in row chunks."""
    out = np.empty((A.shape[0], B.shape[0]))
    step = max(1, chunk_cells // max(1, B.shape[0] * max(1, B.shape[1])))
    for start in range(0, A.shape[0], step):
        diff = A[start:start + step, None, :] - B[None, :, :]
        out[start:start + step] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


class KNNModel(TrainedModel):
    def __init__(self, X, y, k):
        self.X, self.y, self.k = X, y, k
        self.params = {"k": k}

    def _support(self, X):
        d2 = _sq_distances(X, self.X)
        # stable sort: equal distances keep the lower training index first
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :self.k]
        frac1 = self.y[nearest].mean(axis=1)
        return np.column_stack([1.0 - frac1, frac1])


@dataclass(frozen=True)
class KNN:
    k: int = 1
    kind = "knn"

    def train(self, ds):
        if len(ds) == 0:
            raise ValueError("kNN needs a nonempty training set")
        k = self.k
        if k > len(ds):
            warnings.warn(f"k={k} exceeds training size {len(ds)}; clamped")
            k = len(ds)
        return KNNModel(ds.X, ds.y.astype(float), k)


# ---------------------------------------------------------------- naive Bayes

class GaussianNBModel(TrainedModel):
    def __init__(self, log_prior, loglik):
        self.log_prior = log_prior
        self.loglik = loglik  # callable (X, class) -> log-likelihood per row

    def _support(self, X):
        logp = np.column_stack([self.log_prior[c] + self.loglik(X, c) for c in (0, 1)])
        return np.exp(logp - logsumexp(logp, axis=1, keepdims=True))


@dataclass(frozen=True)
class GaussianNB:
    """Naive Bayes with per-feature Gaussian likelihoods.

    With ``kernel=True`` each per-feature density is a Gaussian kernel
    estimate with Silverman's bandwidth instead of a single Gaussian.
    """
    kernel: bool = False
    var_floor: float = 1e-9
    kind = "gnb"

    def train(self, ds):
        n0, n1 = ds.class_counts
        if n0 == 0 or n1 == 0:
            return prior_only(ds)
        n = n0 + n1
        log_prior = np.log([n0 / n, n1 / n])
        parts = [ds.X[ds.y == c] for c in (0, 1)]
        if not self.kernel:
            mean = [p.mean(axis=0) for p in parts]
            var = [np.maximum(p.var(axis=0), self.var_floor) for p in parts]

            def loglik(X, c):
                return -0.5 * np.sum(np.log(2 * np.pi * var[c])
                                     + (X - mean[c]) ** 2 / var[c], axis=1)
        else:
            bw = [np.maximum(1.06 * np.sqrt(np.maximum(p.var(axis=0), self.var_floor))
                             * len(p) ** -0.2, np.sqrt(self.var_floor)) for p in parts]

            def loglik(X, c):
                p, h = parts[c], bw[c]
                z = (X[:, None, :] - p[None, :, :]) / h
                logk = -0.5 * z ** 2 - np.log(h * np.sqrt(2 * np.pi))
                return np.sum(logsumexp(logk, axis=1) - np.log(len(p)), axis=1)
        return GaussianNBModel(log_prior, loglik)


# ------------------------------------------------------------------- logistic

def logistic_loss(w, X1, y, l2):
    """Mean log-loss plus ``l2/2 * ||w[:-1]||^2`` (bias unpenalized)."""
    z = X1 @ w
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * w[:-1] @ w[:-1])


def logistic_grad(w, X1, y, l2):
    g = X1.T @ (expit(X1 @ w) - y) / len(y)
    g[:-1] += l2 * w[:-1]
    return g


class LogisticModel(TrainedModel):
    def __init__(self, w, l2):
        self.w = w
        self.params = {"l2": l2}

    def _support(self, X):
        p1 = expit(X @ self.w[:-1] + self.w[-1])
        return np.column_stack([1.0 - p1, p1])


@dataclass(frozen=True)
class Logistic:
    l2: float = 1e-2
    tol: float = 1e-6
    max_iter: int = 10000
    kind = "logistic"

    def train(self, ds):
        if len(ds) == 0:
            raise ValueError("logistic regression needs a nonempty training set")
        X1 = np.column_stack([ds.X, np.ones(len(ds))])
        y = ds.y.astype(float)
        lip = 0.25 * np.linalg.eigvalsh(X1.T @ X1 / len(y))[-1] + self.l2
        step = 1.0 / lip
        w = np.zeros(X1.shape[1])
        best_w, best_norm = w, np.inf
        for _ in range(self.max_iter):
            g = logistic_grad(w, X1, y, self.l2)
            gnorm = np.linalg.norm(g)
            if gnorm < best_norm:
                best_w, best_norm = w, gnorm
            if gnorm < self.tol:
                break
            w = w - step * g
        else:
            warnings.warn(f"logistic regression stopped after {self.max_iter} iterations "
                          f"(gradient norm {best_norm:.2e})")
        return LogisticModel(best_w, self.l2)


# ---------------------------------------------------------------------- stump

class StumpModel(TrainedModel):
    def __init__(self, feature, threshold, left, right):
        self.feature, self.threshold = feature, threshold
        self.left, self.right = np.asarray(left), np.asarray(right)

    def _support(self, X):
        if self.feature is None:
            return np.tile(self.left, (X.shape[0], 1))
        go_left = X[:, self.feature] <= self.threshold
        return np.where(go_left[:, None], self.left, self.right)


def _gini(n0, n1):
    n = n0 + n1
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(n > 0, n1 / n, 0.0)
    return 2.0 * p * (1.0 - p)


@dataclass(frozen=True)
class Stump:
    """One-split decision tree chosen by weighted Gini impurity."""
    kind = "stump"

    def train(self, ds):
        if len(ds) == 0:
            raise ValueError("stump needs a nonempty training set")
        n = len(ds)
        y = ds.y.astype(float)
        root = float(_gini(np.float64(n - y.sum()), np.float64(y.sum())))
        best = (root - 1e-12, None, None)
        for f in range(ds.X.shape[1]):
            order = np.argsort(ds.X[:, f], kind="stable")
            xs, ys = ds.X[order, f], y[order]
            cut = np.flatnonzero(xs[1:] > xs[:-1])  # split after position cut
            if cut.size == 0:
                continue
            left1 = np.cumsum(ys)[cut]
            left_n = cut + 1.0
            right1 = ys.sum() - left1
            right_n = n - left_n
            score = (left_n * _gini(left_n - left1, left1)
                     + right_n * _gini(right_n - right1, right1)) / n
            i = int(np.argmin(score))
            if score[i] < best[0]:
                best = (score[i], f, 0.5 * (xs[cut[i]] + xs[cut[i] + 1]))
        _, f, thr = best
        if f is None:
            freq = y.mean()
            return StumpModel(None, None, [1.0 - freq, freq], [1.0 - freq, freq])
        mask = ds.X[:, f] <= thr

        def leaf(m):
            k1, k = y[m].sum(), m.sum()
            return [(k - k1 + 1.0) / (k + 2.0), (k1 + 1.0) / (k + 2.0)]
        return StumpModel(f, thr, leaf(mask), leaf(~mask))


# --------------------------------------------------------------------- tuning

LEARNERS = {"knn": KNN, "gnb": GaussianNB, "logistic": Logistic, "stump": Stump}

DEFAULT_GRIDS = {
    "knn": [{"k": k} for k in (1, 3, 5, 7, 9, 11)],
    "logistic": [{"l2": v} for v in (1e-3, 1e-2, 1e-1, 1.0)],
}


def make_learner(kind, **params):
    try:
        return LEARNERS[kind](**params)
    except KeyError:
        raise ValueError(f"unknown base classifier {kind!r}") from None


@dataclass(frozen=True)
class TuningSpec:
    grid: list
    folds: int = 3

    def __post_init__(self):
        if not self.grid:
            raise ValueError("tuning grid is empty")
        if self.folds < 2:
            raise ValueError("tuning needs at least two folds")


def minority_class(y):
    """The less frequent class; ties resolve to class 1."""
    n1 = int(np.sum(y))
    return 1 if n1 <= len(y) - n1 else 0


def minority_f1(y_true, y_pred, minority):
    """F1 of the minority class; a fold with no minority instances and no
    minority predictions scores 0."""
    t = np.asarray(y_true) == minority
    p = np.asarray(y_pred) == minority
    tp, fp, fn = int(np.sum(t & p)), int(np.sum(~t & p)), int(np.sum(t & ~p))
    if tp + fp + fn == 0:
        return 0.0
    return float(metrics.f1_score(tp, fp, fn))


def cv_scores(kind, ds, spec, seed):
    """Mean minority-class F1 of every grid point over the same folds."""
    folds = kfold_indices(len(ds), min(spec.folds, len(ds)), seed)
    minority = minority_class(ds.y)
    scores = []
    for params in spec.grid:
        learner = make_learner(kind, **params)
        fold_scores = []
        for i, test in enumerate(folds):
            train = np.concatenate([f for j, f in enumerate(folds) if j != i])
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                model = learner.train(ds.subset(train))
            fold_scores.append(minority_f1(ds.y[test], model.decide(ds.X[test]), minority))
        scores.append(float(np.mean(fold_scores)))
    return scores


def tune_learner(kind, ds, spec, seed):
    """Grid point with the best mean minority-class F1 (first wins ties)."""
    if len(spec.grid) == 1 or len(ds) < 2:
        return make_learner(kind, **spec.grid[0])
    scores = cv_scores(kind, ds, spec, seed)
    return make_learner(kind, **spec.grid[int(np.argmax(scores))])


def tune(kind, ds, spec, seed):
    """Tune on ``ds`` by cross-validation, then retrain on all of ``ds``."""
    return tune_learner(kind, ds, spec, seed).train(ds)
