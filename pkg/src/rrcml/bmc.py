"""Bayes metaclassifier (BMC).

The base classifier's crisp outcome ``s`` at ``x`` is treated as an
observation; class-conditional outcome probabilities ``p(s | i)`` are
neighbourhood-weighted averages of the archive points' RRC probabilities,
taken over archive points of true class ``i`` only.
"""
import warnings

import numpy as np

from .base import TrainedModel, _as_batch
from .scm import build_archive, relative_weights


class ClassAbsentError(ValueError):
    """The validation archive holds no point of the requested class."""


class BMCModel(TrainedModel):
    def __init__(self, base_model, archive):
        self.base_model = base_model
        self.archive = archive
        counts = np.array([np.sum(archive.y == 0), np.sum(archive.y == 1)], dtype=float)
        self.priors = (counts + 1.0) / (counts.sum() + 2.0)
        self.missing = tuple(int(c) for c in np.flatnonzero(counts == 0))
        self.params = dict(getattr(base_model, "params", {}), beta=archive.beta)

    def with_beta(self, beta):
        return BMCModel(self.base_model, self.archive.with_beta(beta))

    def _conditionals(self, X):
        """Array (n, s, i) of p(s | i) at every row of X."""
        a = self.archive
        out = np.empty((X.shape[0], 2, 2))
        for i in (0, 1):
            mask = a.y == i
            if not mask.any():
                raise ClassAbsentError(f"class {i} absent from validation archive")
            w = relative_weights(X, a.X[mask], a.beta)
            out[:, :, i] = (w @ a.rrc[mask]) / w.sum(axis=1, keepdims=True)
        return out

    def class_conditional(self, x, s, i):
        X, single = _as_batch(x)
        a = self.archive
        mask = a.y == i
        if not mask.any():
            raise ClassAbsentError(f"class {i} absent from validation archive")
        w = relative_weights(X, a.X[mask], a.beta)
        p = (w @ a.rrc[mask, s]) / w.sum(axis=1)
        return p[0] if single else p

    def _support(self, X):
        if self.missing:
            warnings.warn(f"classes {self.missing} absent from archive; "
                          "using the base model's output")
            return self.base_model.support(X)
        s = self.base_model.decide(X)
        cond = self._conditionals(X)
        lik = cond[np.arange(X.shape[0]), s, :]
        num = self.priors * lik
        den = num.sum(axis=1, keepdims=True)
        bad = den[:, 0] <= 0
        if bad.any():
            warnings.warn(f"{int(bad.sum())} queries with zero likelihood; "
                          "falling back to priors")
            num[bad] = self.priors
            den[bad] = 1.0
        return num / den

    def decide_grid(self, X, betas):
        return [self.with_beta(beta).decide(X) for beta in betas]


def bmc_posterior_from(priors, likelihood):
    """Bayes rule ``p_i p(s|i) / sum_j p_j p(s|j)`` for one outcome."""
    num = np.asarray(priors, dtype=float) * np.asarray(likelihood, dtype=float)
    den = num.sum()
    if den <= 0:
        warnings.warn("zero likelihood for both classes; falling back to priors")
        return np.asarray(priors, dtype=float)
    return num / den


def build_bmc(learner, ds, beta, seed):
    archive = build_archive(learner, ds, beta, seed)
    return BMCModel(learner.train(ds), archive)


def bmc_posterior(x, model):
    return model.support(x)


def bmc_decide(x, model):
    return model.decide(x)
