"""Principal components variable importance reconstruction."""

from .distributions import chi_squared_sf, normal_cdf, normal_quantile, welch_t_test
from .exceptions import DataError, DomainError, FitError, PcvirError
from .glm import LabelCoding, LogisticFit, fit_logistic, per_variable_z, predict_prob
from .importance import (
    GroupedPcvirResult,
    ImportanceThresholds,
    adjust_z,
    classify,
    fit_grouped,
    reconstruct,
)
from .pca import PcaModel, Retention, fit_pca, parallel_analysis_threshold, project
from .synthdata import GeneratorSpec, generate
from .table import FeatureTable
from .validation import (
    SplitSpec,
    compare_configurations,
    hosmer_lemeshow,
    run_validation,
    select_variables,
    split,
)

__version__ = "0.1.0"
