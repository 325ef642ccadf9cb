"""Polytomous latent class analysis for categorical survey data."""

from ._kernels import BACKEND
from .bias import (
    BiasReport,
    ClassProfile,
    Designation,
    build_report,
    characterize_classes,
    consistency_probabilities,
    designate_bias_classes,
    extreme_bias_probabilities,
)
from .criteria import count_parameters, identifiability_check, information_criteria
from .errors import (
    DataError,
    DesignationError,
    EmptyClassError,
    IdentifiabilityError,
    ImpossibleObservationError,
    LatentClassError,
    SchemaError,
    SelectionError,
)
from .model import (
    EmConfig,
    FitResult,
    LcaParameters,
    canonical_order,
    em_iterate,
    fit_em,
    joint_class_density,
    log_likelihood,
    mixture_density,
    posterior,
)
from .responses import (
    MISSING,
    ResponseMatrix,
    drop_incomplete,
    load_responses,
    tabulate,
    write_responses,
)
from .schema import Indicator, SurveySchema, iesh_schema, load_schema
from .selection import SweepRecord, SweepResult, select_model, sweep_classes
from .synthetic import (
    SyntheticDataset,
    align_labels,
    recovery_error,
    sample_dataset,
    well_separated_truth,
)

__version__ = "0.1.0"
