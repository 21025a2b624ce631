"""Spatial clustering with normalized scores and decision-level fusion of
component object detections for broad area search."""

from .cluster import (
    Cluster,
    ClusterParams,
    ModeClustering,
    NormConstants,
    cluster_detections,
    cluster_field,
    norm_constants,
    penalty_weight,
    top_k,
)
from .dta import DtaThreshold, F1ThresholdClassifier, fit_threshold, sweep_curve
from .features import Candidate, CandidateFeatures, CandidateScanner, extract_features, feature_matrix
from .field import AmplifiedDetection, DetectionField, RawDetection, alpha_cut, amplify
from .fusion import AnfisClassifier, MLPFusionClassifier, OrGateClassifier, ThresholdScaler, fuse_candidates, or_gate
from .geo import DistanceModel, Point, SpatialIndex, distance, radius_query
from .metrics import Metrics, confusion, error_density, relative_error_reduction
from .rank import WeightProfile, avg_tp_rank, fused_score, rerank

__version__ = "0.1.0"

__all__ = [
    "AmplifiedDetection",
    "AnfisClassifier",
    "Candidate",
    "CandidateFeatures",
    "CandidateScanner",
    "Cluster",
    "ClusterParams",
    "DetectionField",
    "DistanceModel",
    "DtaThreshold",
    "F1ThresholdClassifier",
    "MLPFusionClassifier",
    "Metrics",
    "ModeClustering",
    "NormConstants",
    "OrGateClassifier",
    "Point",
    "RawDetection",
    "SpatialIndex",
    "ThresholdScaler",
    "WeightProfile",
    "alpha_cut",
    "amplify",
    "avg_tp_rank",
    "cluster_detections",
    "cluster_field",
    "confusion",
    "distance",
    "error_density",
    "extract_features",
    "feature_matrix",
    "fit_threshold",
    "fuse_candidates",
    "fused_score",
    "norm_constants",
    "or_gate",
    "penalty_weight",
    "radius_query",
    "relative_error_reduction",
    "rerank",
    "sweep_curve",
    "top_k",
]
