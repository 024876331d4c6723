from .base import Classifier
from .forest import RandomForest, rf_fit
from .knn import KNNClassifier, knn_fit, knn_predict
from .metrics import ConfusionMatrix, confusion_from_predictions, evaluate
from .naive_bayes import GaussianNB, gaussian_density, gnb_fit, gnb_predict
from .reference import REFERENCE, audit_reference, reference_matrix
from .tree import DecisionTree, dtree_fit, gini, weighted_gini

VARIANTS = {
    "knn": KNNClassifier,
    "gaussian_nb": GaussianNB,
    "decision_tree": DecisionTree,
    "random_forest": RandomForest,
}


def classifier_from_dict(data: dict) -> Classifier:
    return VARIANTS[data["variant"]].from_dict(data)


__all__ = [
    "Classifier",
    "ConfusionMatrix",
    "DecisionTree",
    "GaussianNB",
    "KNNClassifier",
    "REFERENCE",
    "RandomForest",
    "VARIANTS",
    "audit_reference",
    "classifier_from_dict",
    "confusion_from_predictions",
    "dtree_fit",
    "evaluate",
    "gaussian_density",
    "gini",
    "gnb_fit",
    "gnb_predict",
    "knn_fit",
    "knn_predict",
    "reference_matrix",
    "rf_fit",
    "weighted_gini",
]
