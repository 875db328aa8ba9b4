"""Impostor-score uniqueness measures and their stability under image degradation."""

__version__ = "0.1.0"

from .conditions import (
    BASELINE,
    Baseline,
    GaussianNoise,
    MotionBlur,
    PoseLabel,
    QualityCondition,
    parse_condition,
)
from .dataset import (
    DatasetManifest,
    ImpostorSet,
    ManifestEntry,
    build_impostor_set,
    load_manifest,
    pool_filter,
)
from .degrade import gaussian_noise, motion_blur
from .matcher import (
    AlignedFace,
    EigenModel,
    ScoreMatrix,
    align,
    export_scores,
    import_scores,
    score_matrix,
    similarity,
    train_eigenmodel,
)
from .stats import BoxStats, boxplot_stats, normalized_falloff, pearson
from .uniqueness import ImpostorScoreSet, IUMResult, ium, max_impostor_statistic, mean_threshold_lambs
from .pipeline import ExperimentConfig, StabilityReport, load_config, run_e1, run_e2
from .report import emit_report
