"""Classifiers and regressors that bind a loss to a solver.

Solvers are selected by a stable integer ``algtype``:

====  ====================================  =========================
id    solver                                applies to
====  ====================================  =========================
0     lbfgsMinOwl (OWL-QN)                  L1 regularizer
1     lbfgsMin                              any loss
2     tron                                  L2 LeastSquares/Logistic/
                                            SmoothSVM/SmoothSVR
3     gd                                    any loss
4     gdLineSearch                          any loss
5     gdBarzilaiBorwein                     any loss
6     gdNesterov                            any loss
7     svcDual                               L2 HingeSVM / SmoothSVM
8     sgd                                   any loss
9     sgdDecayingLearningRate               any loss
10    sgdAdagrad                            any loss
11    sgdStochasticAverageGradient          L2 regularizer
12    sgdRegularizedDualAveraging           L1 regularizer
13    sgdRegularizedDualAveragingAdagrad    L1 regularizer
====  ====================================  =========================

Binary labels are mapped to -1/+1 in ascending order of the raw values.
Multiclass problems use one-vs-rest with one weight vector per class.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from . import batch_opt, dual_opt, stochastic_opt
from .batch_opt import SolverConfig, SolverResult
from .dataio import Dataset, format_number
from .linalg import SparseExample
from .losses import LossKind, Regularizer, RegularizedLoss
from .stochastic_opt import StochasticConfig

ALGTYPES = {
    0: "lbfgsMinOwl",
    1: "lbfgsMin",
    2: "tron",
    3: "gd",
    4: "gdLineSearch",
    5: "gdBarzilaiBorwein",
    6: "gdNesterov",
    7: "svcDual",
    8: "sgd",
    9: "sgdDecayingLearningRate",
    10: "sgdAdagrad",
    11: "sgdStochasticAverageGradient",
    12: "sgdRegularizedDualAveraging",
    13: "sgdRegularizedDualAveragingAdagrad",
}
ALGTYPE_IDS = {name: k for k, name in ALGTYPES.items()}


class ConfigurationError(ValueError):
    """An invalid loss/solver/config combination."""


def solver_name(algtype: Union[int, str]) -> str:
    if isinstance(algtype, str):
        if algtype in ALGTYPE_IDS:
            return algtype
        raise ConfigurationError(f"unknown solver {algtype!r}")
    try:
        return ALGTYPES[int(algtype)]
    except (KeyError, ValueError):
        raise ConfigurationError(f"unknown algtype {algtype!r}") from None


def inapplicable_reason(kind: LossKind, reg: Regularizer, solver: str) -> Optional[str]:
    """Why ``solver`` cannot train this loss, or None if it can."""
    kind, reg = LossKind(kind), Regularizer(reg)
    if solver in ("lbfgsMinOwl", "sgdRegularizedDualAveraging",
                  "sgdRegularizedDualAveragingAdagrad") and reg is not Regularizer.L1:
        return f"{solver} requires the L1 regularizer"
    if solver == "sgdStochasticAverageGradient" and reg is not Regularizer.L2:
        return f"{solver} requires the L2 regularizer"
    if solver == "tron" and not (reg is Regularizer.L2 and kind in (
            LossKind.LEAST_SQUARES, LossKind.LOGISTIC,
            LossKind.SMOOTH_SVM, LossKind.SMOOTH_SVR)):
        return "tron requires a Hessian-capable L2 loss"
    if solver == "svcDual" and not (reg is Regularizer.L2 and kind in (
            LossKind.HINGE_SVM, LossKind.SMOOTH_SVM)):
        return "svcDual requires an L2-regularized HingeSVM or SmoothSVM loss"
    return None


@dataclass
class ClassifierSpec:
    """What to train: loss, regularization, solver and its settings.

    ``config`` is a :class:`SolverConfig` for batch solvers and ``svcDual``
    (where ``tol`` bounds the projected gradient and ``max_eval`` the
    number of epochs), or a :class:`StochasticConfig` for the stochastic
    family. ``None`` selects the defaults.
    """

    loss: LossKind = LossKind.LOGISTIC
    regularizer: Regularizer = Regularizer.L2
    lam: float = 1.0
    algtype: Union[int, str] = 1
    config: Union[SolverConfig, StochasticConfig, None] = None
    n_classes: int = 2
    huber_threshold: float = 0.5
    svr_epsilon: float = 0.1
    seed: int = 0

    def __post_init__(self):
        self.loss = LossKind(self.loss)
        self.regularizer = Regularizer(self.regularizer)
        self.solver = solver_name(self.algtype)
        if self.lam < 0:
            raise ConfigurationError("lam must be >= 0")
        reason = inapplicable_reason(self.loss, self.regularizer, self.solver)
        if reason:
            raise ConfigurationError(reason)
        if self.solver == "svcDual" and not self.lam > 0:
            raise ConfigurationError("svcDual needs lam > 0 (C = 1/lam)")
        stochastic = self.solver in stochastic_opt.STOCHASTIC_SOLVERS
        if self.config is None:
            self.config = StochasticConfig(seed=self.seed) if stochastic else SolverConfig()
        want = StochasticConfig if stochastic else SolverConfig
        if not isinstance(self.config, want):
            raise ConfigurationError(f"{self.solver} takes a {want.__name__}")
        if self.is_classification and self.n_classes < 2:
            raise ConfigurationError("n_classes must be >= 2")

    @property
    def is_classification(self) -> bool:
        return self.loss.is_classification


@dataclass
class TrainedModel:
    """Learned weights; one row per one-vs-rest class, else a single row."""

    weights: np.ndarray
    class_labels: np.ndarray
    spec: Optional[ClassifierSpec] = None
    task: str = "binary"
    results: List[SolverResult] = field(default_factory=list, repr=False)

    @property
    def num_features(self) -> int:
        return self.weights.shape[1]

    def _matrix(self, data: Dataset):
        # drops test-time features the model never saw
        X = data.to_csr()
        m = self.num_features
        if X.shape[1] == m:
            return X
        if X.shape[1] > m:
            return X[:, :m]
        return sp.csr_matrix((X.data, X.indices, X.indptr), shape=(X.shape[0], m))

    def decision_function(self, data: Dataset) -> np.ndarray:
        """Scores with shape (n, rows of ``weights``)."""
        return np.asarray(self._matrix(data) @ self.weights.T)

    def predict_scores(self, x: SparseExample) -> np.ndarray:
        keep = x.indices < self.num_features
        return self.weights[:, x.indices[keep]] @ x.values[keep]

    def labels_from_scores(self, scores: np.ndarray) -> np.ndarray:
        scores = np.atleast_2d(scores)
        if self.task == "regression":
            return scores[:, 0]
        if self.weights.shape[0] == 1:
            return np.where(scores[:, 0] >= 0, self.class_labels[1], self.class_labels[0])
        return self.class_labels[np.argmax(scores, axis=1)]

    def predict_dataset(self, data: Dataset) -> np.ndarray:
        return self.labels_from_scores(self.decision_function(data))


def _binary_problem(spec: ClassifierSpec, data: Dataset) -> SolverResult:
    x0 = np.zeros(data.num_features)
    if spec.solver == "svcDual":
        kind = "L1SVM" if spec.loss is LossKind.HINGE_SVM else "L2SVM"
        C = 1.0 / spec.lam
        res = dual_opt.svc_dual(data, kind, C=C, tol=spec.config.tol,
                                max_epochs=spec.config.max_eval, seed=spec.seed)
        res.info["c_objective"] = res.f
        res.f = dual_opt.to_lambda_objective(res.f, C)
        return res
    loss = RegularizedLoss(data, spec.lam, spec.regularizer, spec.loss,
                           spec.huber_threshold, spec.svr_epsilon)
    if spec.solver in stochastic_opt.STOCHASTIC_SOLVERS:
        return stochastic_opt.STOCHASTIC_SOLVERS[spec.solver](loss, x0, spec.config)
    return batch_opt.BATCH_SOLVERS[spec.solver](loss, x0, spec.config)


def train(spec: ClassifierSpec, data: Dataset,
          one_vs_rest: Optional[bool] = None) -> TrainedModel:
    """Fit ``spec`` on ``data``.

    Binary problems solve one problem unless ``one_vs_rest=True`` forces
    the multiclass path. Regression losses fit raw labels.
    """
    if data.num_examples == 0:
        raise ValueError("cannot train on an empty dataset")
    if not spec.is_classification:
        res = _binary_problem(spec, data)
        return TrainedModel(res.w[None, :], np.empty(0), spec, "regression", [res])
    classes = np.unique(data.labels)
    if classes.size < 2:
        raise ValueError("classification needs at least two distinct labels")
    if classes.size != spec.n_classes:
        raise ConfigurationError(
            f"n_classes={spec.n_classes} but data has {classes.size} labels")
    if classes.size == 2 and not one_vs_rest:
        y = np.where(data.labels == classes[1], 1.0, -1.0)
        res = _binary_problem(spec, data.with_labels(y))
        return TrainedModel(res.w[None, :], classes, spec, "binary", [res])
    results = []
    for c in classes:
        y = np.where(data.labels == c, 1.0, -1.0)
        results.append(_binary_problem(spec, data.with_labels(y)))
    W = np.vstack([r.w for r in results])
    return TrainedModel(W, classes, spec, "multiclass", results)


def predict(model: TrainedModel, x: SparseExample):
    """Raw label (or real value, for regression) for one example.

    Binary ties (score exactly 0) go to the class mapped to +1; multiclass
    ties go to the lowest class index. Unknown feature ids are ignored.
    """
    label = model.labels_from_scores(model.predict_scores(x)[None, :])[0]
    return float(label)


def predict_accuracy(model: TrainedModel, test: Dataset) -> float:
    if test.num_examples == 0:
        raise ValueError("empty test set")
    if model.task == "regression":
        raise ValueError("accuracy is undefined for regression; use mean_squared_error")
    wrong = int(np.count_nonzero(model.predict_dataset(test) != test.labels))
    return 1.0 - wrong / test.num_examples


def mean_squared_error(model: TrainedModel, test: Dataset) -> float:
    if test.num_examples == 0:
        raise ValueError("empty test set")
    r = model.predict_dataset(test) - test.labels
    return float(r @ r) / test.num_examples


def fold_indices(n: int, folds: int, seed: int = 0) -> List[np.ndarray]:
    """Seeded shuffle split into ``folds`` contiguous parts (sizes differ by <= 1)."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if folds > n:
        raise ValueError(f"folds={folds} exceeds n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def cross_validate(spec: ClassifierSpec, data: Dataset, folds: int = 5,
                   seed: int = 0) -> Tuple[float, List[float]]:
    parts = fold_indices(data.num_examples, folds, seed)
    scores = []
    for k, test_idx in enumerate(parts):
        train_idx = np.concatenate([p for j, p in enumerate(parts) if j != k])
        model = train(spec, data.subset(train_idx))
        scores.append(predict_accuracy(model, data.subset(test_idx)))
    return float(np.mean(scores)), scores


class ModelFormatError(ValueError):
    pass


def save_model(model: TrainedModel, sink) -> None:
    """Text format: ``m nClasses`` / raw class labels / one weight row per line.

    Regression models write ``nClasses = 0`` and an empty label line.
    """
    n_classes = 0 if model.task == "regression" else model.class_labels.size
    lines = [f"{model.num_features} {n_classes}",
             " ".join(format_number(c) for c in model.class_labels)]
    lines += [" ".join(format_number(v) for v in row) for row in model.weights]
    text = "\n".join(lines) + "\n"
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sink.write(text)


def load_model(source) -> TrainedModel:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    try:
        m, n_classes = (int(t) for t in lines[0].split())
        labels = np.array([float(t) for t in lines[1].split()])
        rows = [np.array([float(t) for t in line.split()]) for line in lines[2:]]
    except (IndexError, ValueError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from None
    if not rows or any(r.shape != (m,) for r in rows):
        raise ModelFormatError(f"expected weight rows of length {m}")
    if n_classes == 0:
        task = "regression"
        if len(rows) != 1 or labels.size:
            raise ModelFormatError("regression model must have one weight row")
    else:
        if labels.size != n_classes or n_classes < 2:
            raise ModelFormatError(f"expected {n_classes} class labels")
        if len(rows) == 1 and n_classes == 2:
            task = "binary"
        elif len(rows) == n_classes:
            task = "multiclass"
        else:
            raise ModelFormatError(f"{len(rows)} weight rows for {n_classes} classes")
    return TrainedModel(np.vstack(rows), labels, None, task)
