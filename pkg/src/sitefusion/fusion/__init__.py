"""Decision-level fusion models."""

from .anfis import AnfisClassifier, AnfisModel, anfis_forward, anfis_loss_and_grad, default_rules, train_anfis
from .fuse import DecisionRecord, FusionResult, combo_classes, fit_fusion, fuse_candidates, make_model, model_from_dict
from .gates import OrGateClassifier, or_gate
from .mlp import MLPFusionClassifier, MlpModel, init_mlp, mlp_loss_and_grad, predict_mlp, train_mlp
from .normalize import ThresholdScaler, fit_column_thresholds, normalize_inputs

__all__ = [
    "AnfisClassifier",
    "AnfisModel",
    "DecisionRecord",
    "FusionResult",
    "MLPFusionClassifier",
    "MlpModel",
    "OrGateClassifier",
    "ThresholdScaler",
    "anfis_forward",
    "anfis_loss_and_grad",
    "combo_classes",
    "default_rules",
    "fit_column_thresholds",
    "fit_fusion",
    "fuse_candidates",
    "init_mlp",
    "make_model",
    "mlp_loss_and_grad",
    "model_from_dict",
    "normalize_inputs",
    "or_gate",
    "predict_mlp",
    "train_anfis",
    "train_mlp",
]
