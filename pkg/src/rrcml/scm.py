"""Soft-confusion-matrix (SCM) correction of a binary classifier.

A validation archive stores, for every training instance, its true class and
the RRC class-assignment probabilities of a model that did not see it. For a
query ``z`` every archive point is weighted by the Gaussian potential
``exp(-beta * ||z - x_k||^2)`` and the weighted, RRC-fuzzified outcomes form
a local 2x2 confusion matrix (rows: true class, columns: outcome). The
corrected posterior mixes the query's own RRC probabilities through the
column-normalized matrix.
"""
import dataclasses
import warnings
from dataclasses import dataclass

import numpy as np

from .base import TrainedModel, _as_batch, _sq_distances, prior_only
from .datamodel import kfold_indices
from .rrc import rrc_probability_batch

DEFAULT_KAPPA = 1e-9


@dataclass(frozen=True, eq=False)
class ValidationArchive:
    """Validation points with true classes and out-of-fold RRC probabilities."""
    X: np.ndarray
    y: np.ndarray
    rrc: np.ndarray
    beta: float
    supports: np.ndarray = None

    def __post_init__(self):
        if len(self.y) == 0:
            raise ValueError("validation archive is empty")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError("beta must be finite and non-negative")

    def __len__(self):
        return len(self.y)

    def with_beta(self, beta):
        return dataclasses.replace(self, beta=float(beta))


def build_archive(learner, ds, beta, seed):
    """Out-of-fold responses from a seeded two-fold split of ``ds``.

    Every instance of ``ds`` becomes an archive point; its supports come
    from the model trained on the other fold.
    """
    if len(ds) < 2:
        raise ValueError("archive construction needs at least two instances")
    folds = kfold_indices(len(ds), 2, seed)
    supports = np.empty((len(ds), 2))
    for i, test in enumerate(folds):
        train = ds.subset(folds[1 - i])
        n0, n1 = train.class_counts
        if n0 == 0 or n1 == 0:
            warnings.warn(f"archive fold {i} trains on a single class; "
                          "using a prior-only model")
            model = prior_only(train)
        else:
            model = learner.train(train)
        supports[test] = model.support(ds.X[test])
    return ValidationArchive(ds.X, ds.y.astype(int), rrc_probability_batch(supports),
                             float(beta), supports)


def neighborhood_memberships(z, archive):
    """Gaussian-potential membership of every archive point in the
    neighbourhood of ``z``."""
    Z, single = _as_batch(z)
    w = np.exp(-archive.beta * _sq_distances(Z, archive.X))
    return w[0] if single else w


def relative_weights(Z, X, beta):
    """Gaussian potentials rescaled so the largest weight per row is 1.

    Rescaling by a per-row constant cancels in every normalized sum and
    avoids underflow when all points are far from the query.
    """
    d2 = _sq_distances(Z, X)
    return np.exp(-beta * (d2 - d2.min(axis=1, keepdims=True)))


def correct_posterior(rrc, confusion):
    """Mix RRC outcome probabilities through a confusion matrix.

    ``P(m | s) = eps[m, s] / sum_u eps[u, s]`` and
    ``P(m | x) = sum_s P(s | x) P(m | s)``. Works on a single pair with a
    2x2 matrix or on stacks of shape (n, 2) and (n, 2, 2).
    """
    confusion = np.asarray(confusion, dtype=float)
    given_s = confusion / confusion.sum(axis=-2, keepdims=True)
    return np.einsum("...s,...ms->...m", np.asarray(rrc, dtype=float), given_s)


class SCMModel(TrainedModel):
    """Base model wrapped with soft-confusion-matrix correction.

    ``support`` returns the corrected posterior, so the wrapped model can
    stand in for the bare base model anywhere.
    """

    def __init__(self, base_model, archive, kappa=DEFAULT_KAPPA):
        if len(archive) == 0:
            raise ValueError("SCM needs a nonempty archive")
        self.base_model = base_model
        self.archive = archive
        self.kappa = kappa
        self.params = dict(getattr(base_model, "params", {}), beta=archive.beta)

    def with_beta(self, beta):
        return SCMModel(self.base_model, self.archive.with_beta(beta), self.kappa)

    def local_confusion(self, z, smoothing=True):
        Z, single = _as_batch(z)
        a = self.archive
        w = relative_weights(Z, a.X, a.beta)
        w /= w.sum(axis=1, keepdims=True)
        eps = np.stack([w[:, a.y == m] @ a.rrc[a.y == m] for m in (0, 1)], axis=1)
        if smoothing:
            eps = eps + self.kappa
        return eps[0] if single else eps

    def base_rrc(self, X):
        return rrc_probability_batch(self.base_model.support(X))

    def _support(self, X):
        post = correct_posterior(self.base_rrc(X), self.local_confusion(X))
        return post / post.sum(axis=1, keepdims=True)

    def decide_grid(self, X, betas):
        """Decisions at ``X`` for each neighbourhood scale in ``betas``."""
        rrc = self.base_rrc(X)
        out = []
        for beta in betas:
            post = correct_posterior(rrc, self.with_beta(beta).local_confusion(X))
            out.append((post[:, 1] >= post[:, 0]).astype(int))
        return out


def build_scm(learner, ds, beta, seed, kappa=DEFAULT_KAPPA):
    """Archive from two-fold responses plus a base model trained on all of ``ds``."""
    archive = build_archive(learner, ds, beta, seed)
    return SCMModel(learner.train(ds), archive, kappa)


def scm_decide(x, model):
    return model.decide(x)
