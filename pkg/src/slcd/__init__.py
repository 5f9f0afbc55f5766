"""Sparse linear causal discovery.

Generate data from linear structural causal models, recover the
structural matrix by minimizing a smoothed rank plus trace surrogate
under reconstruction and induced-covariance constraints, and evaluate
the recovered links.
"""

from .datagen import (
    BUILTIN_IDS,
    Dataset,
    builtin_spec,
    center,
    load_dataset,
    sample,
    sample_covariance,
    save_dataset,
)
from .evaluation import (
    DEFAULT_LAMBDA_GRID,
    DEFAULT_SIGMA_GRID,
    DEFAULT_THETA,
    MetricBundle,
    SweepCell,
    SweepResult,
    covariance_error,
    extract_edges,
    metric_bundle,
    precision_recall,
    reconstruction_error,
    structure_error,
    sweep,
)
from .objective import (
    Hyperparams,
    ObjectiveBreakdown,
    gradient,
    objective,
    resolve_epsilons,
    residuals,
    smoothed_rank,
    smoothed_trace,
)
from .scm_core import (
    Distribution,
    EdgeSet,
    Gaussian,
    ScmSpec,
    StructuralMatrix,
    Uniform,
    VariableDef,
    induced_covariance,
    numerical_rank,
    true_edges,
    validate_ground_truth,
)
from .solver import (
    DiscoveryResult,
    RestartRecord,
    SolverAbort,
    SolverControls,
    row_threshold,
    slcd,
    solve_relaxed,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_IDS",
    "DEFAULT_LAMBDA_GRID",
    "DEFAULT_SIGMA_GRID",
    "DEFAULT_THETA",
    "Dataset",
    "DiscoveryResult",
    "Distribution",
    "EdgeSet",
    "Gaussian",
    "Hyperparams",
    "MetricBundle",
    "ObjectiveBreakdown",
    "RestartRecord",
    "ScmSpec",
    "SolverAbort",
    "SolverControls",
    "StructuralMatrix",
    "SweepCell",
    "SweepResult",
    "Uniform",
    "VariableDef",
    "builtin_spec",
    "center",
    "covariance_error",
    "extract_edges",
    "gradient",
    "induced_covariance",
    "load_dataset",
    "metric_bundle",
    "numerical_rank",
    "objective",
    "precision_recall",
    "reconstruction_error",
    "residuals",
    "resolve_epsilons",
    "row_threshold",
    "sample",
    "sample_covariance",
    "save_dataset",
    "slcd",
    "smoothed_rank",
    "smoothed_trace",
    "solve_relaxed",
    "structure_error",
    "sweep",
    "true_edges",
    "validate_ground_truth",
    "__version__",
]
