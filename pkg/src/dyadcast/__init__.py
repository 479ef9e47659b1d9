"""Out-of-sample forecasting benchmarks on directed temporal event networks."""

from .design import (
    SPEC_CLASSES,
    SPEC_COMBINED,
    SPEC_COVARIATES,
    SPEC_ENDOGENOUS,
    DyadDesign,
    FeatureConfig,
    build_design,
    stack_designs,
)
from .errors import (
    DataError,
    DyadcastError,
    EvaluationError,
    FitError,
    GenerationError,
    ParseError,
    SchemaError,
    TuningError,
    ValidationError,
)
from .evaluation import (
    ContingencyCounts,
    Curve,
    RatioSeries,
    SELECTION_THRESHOLD,
    bootstrap_ci,
    coefficient_ratio,
    contingency,
    metrics,
    pr_curve,
    roc_curve,
    rolling_mean,
)
from .features import (
    ENDOGENOUS_FEATURE_NAMES,
    NeighborIndex,
    adamic_adar,
    common_combatants,
    feature_block,
    flow,
    jaccard,
    memory,
)
from .harness import (
    AggregateRow,
    CellResult,
    ExperimentConfig,
    RunResult,
    aggregate_rows,
    load_config,
    load_run_inputs,
    read_cells_csv,
    run_experiment,
    summarize,
    write_outputs,
)
from .latent import (
    BundleCache,
    CommunityPartition,
    LatentBundle,
    LatentConfig,
    LatentSpaceFit,
    MMSBMFit,
    common_community,
    fit_bundle,
    fit_latent_space,
    fit_mmsbm,
    latent_distance,
    mmsbm_prob,
    modularity,
    walktrap,
)
from .learners import (
    LEARNERS,
    FittedModel,
    Standardizer,
    TrainingSet,
    TuneGrid,
    TuneResult,
    fit_elastic_net,
    fit_learner,
    fit_logit,
    fit_logitboost,
    fit_neural_net,
    predict,
    tune,
)
from .seeding import seed_for
from .store import (
    CANONICAL_COVARIATES,
    INDICATOR_COVARIATES,
    CovariateTable,
    EventPanel,
    LaggedNetwork,
    aggregate_window,
    eligible_dyads,
    load_covariates,
    load_events,
)
from .synth import GroundTruth, SyntheticSpec, generate_synthetic, save_synthetic

__all__ = [
    "AggregateRow",
    "BundleCache",
    "CANONICAL_COVARIATES",
    "CellResult",
    "CommunityPartition",
    "ContingencyCounts",
    "CovariateTable",
    "Curve",
    "DataError",
    "DyadDesign",
    "DyadcastError",
    "ENDOGENOUS_FEATURE_NAMES",
    "EvaluationError",
    "EventPanel",
    "ExperimentConfig",
    "FeatureConfig",
    "FitError",
    "FittedModel",
    "GenerationError",
    "GroundTruth",
    "INDICATOR_COVARIATES",
    "LEARNERS",
    "LaggedNetwork",
    "LatentBundle",
    "LatentConfig",
    "LatentSpaceFit",
    "MMSBMFit",
    "NeighborIndex",
    "ParseError",
    "RatioSeries",
    "RunResult",
    "SELECTION_THRESHOLD",
    "SPEC_CLASSES",
    "SPEC_COMBINED",
    "SPEC_COVARIATES",
    "SPEC_ENDOGENOUS",
    "SchemaError",
    "Standardizer",
    "SyntheticSpec",
    "TrainingSet",
    "TuneGrid",
    "TuneResult",
    "TuningError",
    "ValidationError",
    "adamic_adar",
    "aggregate_rows",
    "aggregate_window",
    "bootstrap_ci",
    "build_design",
    "coefficient_ratio",
    "common_combatants",
    "common_community",
    "contingency",
    "eligible_dyads",
    "feature_block",
    "flow",
    "fit_bundle",
    "fit_elastic_net",
    "fit_latent_space",
    "fit_learner",
    "fit_logit",
    "fit_logitboost",
    "fit_mmsbm",
    "fit_neural_net",
    "generate_synthetic",
    "jaccard",
    "latent_distance",
    "load_config",
    "load_run_inputs",
    "load_covariates",
    "load_events",
    "memory",
    "metrics",
    "mmsbm_prob",
    "modularity",
    "pr_curve",
    "predict",
    "roc_curve",
    "rolling_mean",
    "read_cells_csv",
    "run_experiment",
    "save_synthetic",
    "seed_for",
    "stack_designs",
    "summarize",
    "tune",
    "walktrap",
    "write_outputs",
]
