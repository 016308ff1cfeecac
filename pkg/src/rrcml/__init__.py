"""Multi-label classification with randomized-reference-classifier based
correction (soft confusion matrix and Bayes metaclassifier)."""
from .base import GaussianNB, KNN, Logistic, Stump, TuningSpec, make_learner, tune
from .bmc import BMCModel, build_bmc
from .datamodel import (BinaryDataset, MultiLabelDataset, SynthSpec, load_dataset,
                        synth_generate)
from .metrics import MetricReport, evaluate_all
from .multilabel import BaseSpec, CorrectionKind, MultiLabelClassifier, train_ml
from .rrc import rrc_probability, rrc_probability_batch
from .scm import SCMModel, build_scm

__version__ = "0.1.0"

__all__ = ["BMCModel", "BaseSpec", "BinaryDataset", "CorrectionKind", "GaussianNB", "KNN",
           "Logistic", "MetricReport", "MultiLabelClassifier", "MultiLabelDataset", "SCMModel",
           "Stump", "SynthSpec", "TuningSpec", "build_bmc", "build_scm", "evaluate_all",
           "load_dataset", "make_learner", "rrc_probability", "rrc_probability_batch",
           "synth_generate", "train_ml", "tune"]
