from .knn import knn_predict, knn_scores
from .linear import LogisticModel, Standardizer, expit, fit_logreg, logistic_gradient, logistic_loss, train_logreg
from .metrics import METRIC_NAMES, EvalReport, auroc, evaluate
from .trees import (
    EnsembleParams,
    Tree,
    TreeEnsembleModel,
    dumps_model,
    fit_ensemble,
    load_model,
    loads_model,
    predict,
    predict_proba,
    save_model,
    train_ensemble,
    tree_seed,
)

CLASSIFIERS = ("extra_trees", "random_forest", "knn", "logreg")

__all__ = [
    "CLASSIFIERS",
    "EnsembleParams",
    "EvalReport",
    "LogisticModel",
    "METRIC_NAMES",
    "Standardizer",
    "Tree",
    "TreeEnsembleModel",
    "auroc",
    "dumps_model",
    "evaluate",
    "expit",
    "fit_ensemble",
    "fit_logreg",
    "knn_predict",
    "knn_scores",
    "load_model",
    "loads_model",
    "logistic_gradient",
    "logistic_loss",
    "predict",
    "predict_proba",
    "save_model",
    "train_ensemble",
    "train_logreg",
    "tree_seed",
]
