"""Convex optimization for regularized linear models.

Losses (:mod:`linopt.losses`) plug into batch, stochastic and dual solvers
(:mod:`linopt.batch_opt`, :mod:`linopt.stochastic_opt`,
:mod:`linopt.dual_opt`); :mod:`linopt.ml` binds the two into classifiers
and regressors.
"""

from importlib import resources

from .batch_opt import (BATCH_SOLVERS, SolverConfig, SolverResult, Termination, gd, gd_barzilai_borwein,
                        gd_line_search, gd_nesterov, lbfgs_min, lbfgs_min_owl, tron)
from .dataio import (Dataset, ParseError, read_feature_file, read_feature_label_files,
                     read_label_file, read_libsvm, write_libsvm)
from .dual_opt import svc_dual
from .linalg import DimensionMismatchError, SparseExample, dot, multiply_accumulate, norm
from .losses import (DifferentiableFunction, LossKind, Quadratic, RegularizedLoss,
                     Regularizer, UnsupportedOperationError, make_loss)
from .ml import (ClassifierSpec, TrainedModel, cross_validate, predict, predict_accuracy,
                 train)
from .stochastic_opt import (STOCHASTIC_SOLVERS, StochasticConfig, sgd, sgd_adagrad, sgd_decaying_learning_rate,
                             sgd_regularized_dual_averaging,
                             sgd_regularized_dual_averaging_adagrad,
                             sgd_stochastic_average_gradient)

__version__ = "0.1.0"


def data_path(name: str) -> str:
    """Filesystem path of a bundled example dataset."""
    return str(resources.files(__package__).joinpath("data", name))
