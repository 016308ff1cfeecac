"""Multi-label quality criteria: Hamming, zero-one, and FDR/FNR/F1 under
example-based, macro and micro averaging.

Zero-division conventions: FDR and FNR are 0 when their denominator is 0;
F1 is 1 when ``tp = fp = fn = 0`` (an empty prediction of an empty set).
"""
from dataclasses import astuple, dataclass, fields

import numpy as np

CRITERIA = ("hamming", "zero_one", "ex_fdr", "ex_fnr", "ex_f1",
            "ma_fdr", "ma_fnr", "ma_f1", "mi_fdr", "mi_fnr", "mi_f1")
DISPLAY_NAMES = dict(zip(CRITERIA, ("Hamming", "Zero-One", "ExFDR", "ExFNR", "ExF1",
                                    "MaFDR", "MaFNR", "MaF1", "MiFDR", "MiFNR", "MiF1")))
HIGHER_BETTER = frozenset({"ex_f1", "ma_f1", "mi_f1"})


def direction(criterion):
    return "higher" if criterion in HIGHER_BETTER else "lower"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int


def _ratio(num, den):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


def fdr(tp, fp):
    return _ratio(fp, fp + tp)


def fnr(tp, fn):
    return _ratio(fn, fn + tp)


def f1_score(tp, fp, fn):
    tp = np.asarray(tp, dtype=float)
    den = 2 * tp + fp + fn
    den = np.asarray(den, dtype=float)
    return np.divide(2 * tp, den, out=np.ones_like(den), where=den > 0)


@dataclass(frozen=True)
class MetricReport:
    hamming: float
    zero_one: float
    ex_fdr: float
    ex_fnr: float
    ex_f1: float
    ma_fdr: float
    ma_fnr: float
    ma_f1: float
    mi_fdr: float
    mi_fnr: float
    mi_f1: float

    def as_tuple(self):
        return astuple(self)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def confusion_counts(pred, truth, axis=None):
    """tp/fp/fn/tn summed along ``axis`` (all cells when ``None``)."""
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    return ConfusionCounts(np.sum(pred & truth, axis=axis), np.sum(pred & ~truth, axis=axis),
                           np.sum(~pred & truth, axis=axis), np.sum(~pred & ~truth, axis=axis))


def evaluate_all(pred, truth):
    """All eleven criteria for binary matrices of shape (N, L)."""
    pred = np.atleast_2d(np.asarray(pred))
    truth = np.atleast_2d(np.asarray(truth))
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    if pred.shape[0] < 1:
        raise ValueError("need at least one instance")
    wrong = pred.astype(bool) != truth.astype(bool)
    ex = confusion_counts(pred, truth, axis=1)
    ma = confusion_counts(pred, truth, axis=0)
    mi = confusion_counts(pred, truth)
    values = (
        wrong.mean(), wrong.any(axis=1).mean(),
        fdr(ex.tp, ex.fp).mean(), fnr(ex.tp, ex.fn).mean(), f1_score(ex.tp, ex.fp, ex.fn).mean(),
        fdr(ma.tp, ma.fp).mean(), fnr(ma.tp, ma.fn).mean(), f1_score(ma.tp, ma.fp, ma.fn).mean(),
        fdr(mi.tp, mi.fp), fnr(mi.tp, mi.fn), f1_score(mi.tp, mi.fp, mi.fn),
    )
    return MetricReport(*(float(v) for v in values))
