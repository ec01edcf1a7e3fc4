"""Cybersickness prediction toolkit.

Simulates VR gameplay sessions, assembles 34-attribute labeled feature
vectors, trains tree-family classifiers for binary and 4-level discomfort
prediction, ranks attribute importance, and maps predicted causes to
mitigation strategies. See the README for the CLI and data formats.
"""

from .registry import (
    ATTRIBUTE_NAMES,
    DiscomfortLevel,
    Game,
    LabelScheme,
    REGISTRY,
    Scenario,
    attribute_index,
    collapse_label,
    registry_checksum,
)
from .records import (
    GameConfig,
    SessionRecord,
    TelemetryFrame,
    UserProfile,
    VRSQReport,
    validate_session,
)
from .data import (
    Dataset,
    FeatureVector,
    FoldPlan,
    assemble_features,
    class_distribution,
    filter_scenario,
    parse_sessions,
    stratified_kfold,
)
from .simulate import SimParams, RiskTrace, generate_corpus, generate_session, risk_score
from .trees import (
    DecisionStump,
    ForestClassifier,
    TreeClassifier,
    best_split,
    gini_impurity,
    info_gain,
    load_model,
    make_learner,
    predict_distribution,
    save_model,
)
from .evaluation import (
    AttributeRanking,
    EvalReport,
    ExperimentGrid,
    accuracy,
    cohen_kappa,
    cross_validate,
    rank_attributes,
    run_experiment_grid,
)
from .advisor import Cause, CauseStrategyMatrix, advise, builtin_matrix, infer_causes, strategies_for
from .heatmap import HeatGrid, aggregate_track_heat, emit_grid_tables, export_heat_csv, export_heat_svg, facet_by

__version__ = "0.1.0"

__all__ = [
    "ATTRIBUTE_NAMES",
    "AttributeRanking",
    "Cause",
    "CauseStrategyMatrix",
    "Dataset",
    "DecisionStump",
    "DiscomfortLevel",
    "EvalReport",
    "ExperimentGrid",
    "FeatureVector",
    "FoldPlan",
    "ForestClassifier",
    "Game",
    "GameConfig",
    "HeatGrid",
    "LabelScheme",
    "REGISTRY",
    "RiskTrace",
    "Scenario",
    "SessionRecord",
    "SimParams",
    "TelemetryFrame",
    "TreeClassifier",
    "UserProfile",
    "VRSQReport",
    "accuracy",
    "advise",
    "aggregate_track_heat",
    "assemble_features",
    "attribute_index",
    "best_split",
    "builtin_matrix",
    "class_distribution",
    "cohen_kappa",
    "collapse_label",
    "cross_validate",
    "emit_grid_tables",
    "export_heat_csv",
    "export_heat_svg",
    "facet_by",
    "filter_scenario",
    "generate_corpus",
    "generate_session",
    "gini_impurity",
    "infer_causes",
    "info_gain",
    "load_model",
    "make_learner",
    "parse_sessions",
    "predict_distribution",
    "rank_attributes",
    "registry_checksum",
    "risk_score",
    "run_experiment_grid",
    "save_model",
    "stratified_kfold",
    "strategies_for",
    "validate_session",
]
