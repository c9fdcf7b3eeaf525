"""Three-class skin-lesion scoring: color constancy, transform ensembles,
EER-calibrated SK-into-MM score fusion, age gating and challenge metrics.
"""

__version__ = "0.1.0"

from .errors import LesionFusionError
from .dataset_io import (
    GroundTruthRecord,
    Label,
    MetadataRecord,
    ScoreTable,
    align,
    load_ground_truth,
    load_metadata,
    load_scores,
    to_binary,
    validate_class_counts,
    write_scores,
)
from .color_constancy import NormalizationConfig, estimate_illuminant, apply_gains, normalize_image
from .augmentation import TransformSpec, apply_transform, default_transform_set
from .providers import ProviderSpec, EnsembleConfig, aggregate_mean, resolve_provider, synthetic_oracle_scores
from .metrics import auc_pair_count, auc_trapezoid, average_precision, evaluate, mean_auc, roc_points
from .calibration import Calibration, derive_calibration, eer_threshold, stratified_kfold
from .fusion import GateConfig, fuse_mm_score, gate_sk_score, run_pipeline
