"""Trajectory-state curation: clustering, novelty-aware sampling, surrogate benchmark."""

__version__ = "0.1.0"

from .cluster import (
    ClusterPartition,
    Dendrogram,
    Merge,
    cophenetic_distance,
    cophenetic_matrix,
    flat_clusters,
    format_dendrogram,
    refresh_partition,
    upgma_linkage,
)
from .metric import (
    DEFAULT_WEIGHTS,
    CondensedDistanceMatrix,
    MetricWeights,
    pairwise_distances,
    read_distance_matrix,
    trajectory_state_distance,
    write_distance_matrix,
)
from .sampling import (
    SamplingConfig,
    Selection,
    SelectionManifest,
    default_experiment_grid,
    plan_experiment_grid,
    sample_familiar,
    sample_novel,
    sampling_round,
)
from .states import (
    TrajectoryPool,
    TrajectoryState,
    estimate_dynamics,
    validate_trajectory_state,
)
from .surrogate import (
    ExperimentResult,
    ExperimentRow,
    ObservedPrefix,
    knn_predict,
    min_ade_k,
    run_al_experiment,
    stratified_holdout,
)
from .synth import (
    MotifSpec,
    SyntheticPoolSpec,
    canonical_pool_spec,
    generate_synthetic_pool,
)

__all__ = [
    "ClusterPartition",
    "CondensedDistanceMatrix",
    "DEFAULT_WEIGHTS",
    "Dendrogram",
    "ExperimentResult",
    "ExperimentRow",
    "Merge",
    "MetricWeights",
    "MotifSpec",
    "ObservedPrefix",
    "SamplingConfig",
    "Selection",
    "SelectionManifest",
    "SyntheticPoolSpec",
    "TrajectoryPool",
    "TrajectoryState",
    "canonical_pool_spec",
    "cophenetic_distance",
    "cophenetic_matrix",
    "default_experiment_grid",
    "estimate_dynamics",
    "flat_clusters",
    "format_dendrogram",
    "generate_synthetic_pool",
    "knn_predict",
    "min_ade_k",
    "pairwise_distances",
    "plan_experiment_grid",
    "read_distance_matrix",
    "refresh_partition",
    "run_al_experiment",
    "sample_familiar",
    "sample_novel",
    "sampling_round",
    "stratified_holdout",
    "trajectory_state_distance",
    "upgma_linkage",
    "validate_trajectory_state",
    "write_distance_matrix",
]
