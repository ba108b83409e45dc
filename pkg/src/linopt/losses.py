"""Differentiable objectives for linear models.

Every regularized loss has the form::

    F(w) = sum_i loss(w . x_i, y_i) + lam * R(w)

with ``R(w) = 0.5 * ||w||^2`` (L2) or ``||w||_1`` (L1). ``lam`` multiplies the
*unscaled* sum over examples; there is no 1/n factor. This is the reciprocal
of the ``C * sum(loss) + 0.5 * ||w||^2`` convention used by LIBLINEAR, so
``C = 1 / lam`` under L2.
"""

from __future__ import annotations

import enum
import math
from typing import Tuple

import numpy as np
from scipy.special import expit, log_ndtr

from .dataio import Dataset
from .linalg import DimensionMismatchError

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class UnsupportedOperationError(RuntimeError):
    """The requested operation is not defined for this function/solver pair."""


class LossKind(enum.Enum):
    LEAST_SQUARES = "LeastSquares"
    LOGISTIC = "Logistic"
    PROBIT = "Probit"
    HINGE_SVM = "HingeSVM"
    SMOOTH_SVM = "SmoothSVM"
    HUBER_SVM = "HuberSVM"
    HINGE_SVR = "HingeSVR"
    SMOOTH_SVR = "SmoothSVR"

    @property
    def is_classification(self) -> bool:
        return self in _CLASSIFICATION

    @property
    def is_smooth(self) -> bool:
        return self not in (LossKind.HINGE_SVM, LossKind.HINGE_SVR)


class Regularizer(enum.Enum):
    L1 = "L1"
    L2 = "L2"


_CLASSIFICATION = frozenset({
    LossKind.LOGISTIC, LossKind.PROBIT, LossKind.HINGE_SVM,
    LossKind.SMOOTH_SVM, LossKind.HUBER_SVM,
})
_HESSIAN_KINDS = frozenset({
    LossKind.LEAST_SQUARES, LossKind.LOGISTIC,
    LossKind.SMOOTH_SVM, LossKind.SMOOTH_SVR,
})


class DifferentiableFunction:
    """Base contract consumed by every solver.

    Subclasses implement ``eval(w) -> (f, g)`` returning the objective value
    and a (sub)gradient. Functions that can provide curvature set
    ``supports_hessian = True`` and implement ``hessp``.
    """

    dimension: int
    supports_hessian = False

    def eval(self, w: np.ndarray) -> Tuple[float, np.ndarray]:
        raise NotImplementedError

    def value(self, w: np.ndarray) -> float:
        return self.eval(w)[0]

    def hessp(self, w: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise UnsupportedOperationError(
            f"{type(self).__name__} does not provide Hessian-vector products")

    def _check(self, w):
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.dimension,):
            raise DimensionMismatchError(
                f"expected vector of length {self.dimension}, got shape {w.shape}")
        return w


class Quadratic(DifferentiableFunction):
    """``f(x) = 0.5 x^T A x - b^T x`` for a symmetric positive semidefinite A."""

    supports_hessian = True

    def __init__(self, A, b=None):
        self.A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.dimension = self.A.shape[0]
        self.b = np.zeros(self.dimension) if b is None else np.asarray(b, dtype=np.float64)

    def eval(self, w):
        w = self._check(w)
        Aw = self.A @ w
        return float(0.5 * w @ Aw - self.b @ w), Aw - self.b

    def hessp(self, w, v):
        return self.A @ np.asarray(v, dtype=np.float64)


# Pointwise terms. ``z`` is the margin w.x_i, ``y`` the label. Each function
# returns (loss, dloss/dz) elementwise.

def _least_squares(z, y, _):
    r = z - y
    return 0.5 * r * r, r


def _logistic(z, y, _):
    t = y * z
    return np.logaddexp(0.0, -t), -y * expit(-t)


def _probit(z, y, _):
    t = y * z
    log_cdf = log_ndtr(t)
    ratio = np.exp(-0.5 * t * t - _LOG_SQRT_2PI - log_cdf)
    return -log_cdf, -y * ratio


def _hinge_svm(z, y, _):
    u = 1.0 - y * z
    return np.maximum(0.0, u), np.where(u > 0.0, -y, 0.0)


def _smooth_svm(z, y, _):
    u = np.maximum(0.0, 1.0 - y * z)
    return u * u, -2.0 * y * u


def _huber_svm(z, y, h):
    u = 1.0 - y * z
    quad = (u + h) ** 2 / (4.0 * h)
    val = np.where(u > h, u, np.where(u < -h, 0.0, quad))
    slope = np.where(u > h, 1.0, np.where(u < -h, 0.0, (u + h) / (2.0 * h)))
    return val, -y * slope


def _hinge_svr(z, y, eps):
    r = z - y
    excess = np.abs(r) - eps
    return np.maximum(0.0, excess), np.where(excess > 0.0, np.sign(r), 0.0)


def _smooth_svr(z, y, eps):
    r = z - y
    excess = np.maximum(0.0, np.abs(r) - eps)
    return excess * excess, 2.0 * np.sign(r) * excess


_POINTWISE = {
    LossKind.LEAST_SQUARES: _least_squares,
    LossKind.LOGISTIC: _logistic,
    LossKind.PROBIT: _probit,
    LossKind.HINGE_SVM: _hinge_svm,
    LossKind.SMOOTH_SVM: _smooth_svm,
    LossKind.HUBER_SVM: _huber_svm,
    LossKind.HINGE_SVR: _hinge_svr,
    LossKind.SMOOTH_SVR: _smooth_svr,
}


def _curvature(kind, z, y, eps):
    """Second derivative (generalized where needed) of the pointwise loss."""
    if kind is LossKind.LEAST_SQUARES:
        return np.ones_like(z)
    if kind is LossKind.LOGISTIC:
        s = expit(y * z)
        return s * (1.0 - s)
    if kind is LossKind.SMOOTH_SVM:
        return np.where(y * z < 1.0, 2.0, 0.0)
    if kind is LossKind.SMOOTH_SVR:
        return np.where(np.abs(z - y) > eps, 2.0, 0.0)
    raise UnsupportedOperationError(f"no Hessian for {kind.value}")


class RegularizedLoss(DifferentiableFunction):
    """``sum_i loss(w.x_i, y_i) + lam * R(w)`` over a :class:`Dataset`.

    Parameters
    ----------
    data : Dataset
        Training examples. Classification kinds require labels in {-1, +1}.
    lam : float
        Regularization strength, >= 0.
    regularizer : Regularizer
    kind : LossKind
    huber_threshold : float
        Half-width ``h`` of the quadratic zone of the Huber hinge.
    svr_epsilon : float
        Insensitive-zone half-width for the SVR losses.

    With the L1 regularizer the gradient at ``w_j == 0`` carries only the
    data term; L1-aware solvers (OWL-QN, RDA) apply their own treatment.
    """

    def __init__(self, data: Dataset, lam: float = 1.0,
                 regularizer: Regularizer = Regularizer.L2,
                 kind: LossKind = LossKind.LOGISTIC,
                 huber_threshold: float = 0.5, svr_epsilon: float = 0.1):
        if lam < 0:
            raise ValueError("lam must be >= 0")
        if huber_threshold <= 0:
            raise ValueError("huber_threshold must be > 0")
        if svr_epsilon < 0:
            raise ValueError("svr_epsilon must be >= 0")
        self.kind = LossKind(kind)
        self.regularizer = Regularizer(regularizer)
        y = data.labels
        if self.kind.is_classification and not np.all(np.abs(y) == 1.0):
            raise ValueError(f"{self.kind.value} needs labels in {{-1, +1}}")
        self.data = data
        self.lam = float(lam)
        self.huber_threshold = float(huber_threshold)
        self.svr_epsilon = float(svr_epsilon)
        self.dimension = data.num_features
        self.X = data.to_csr()
        self.y = y
        self.rows = [(ex.indices, ex.values) for ex in data.examples]
        self._param = (self.huber_threshold if self.kind is LossKind.HUBER_SVM
                       else self.svr_epsilon)

    def __repr__(self):
        return (f"RegularizedLoss({self.regularizer.value}{self.kind.value}, "
                f"lam={self.lam}, n={self.n_examples}, m={self.dimension})")

    @property
    def name(self) -> str:
        return f"{self.regularizer.value}{self.kind.value}Loss"

    @property
    def n_examples(self) -> int:
        return self.X.shape[0]

    @property
    def supports_hessian(self) -> bool:
        return self.kind in _HESSIAN_KINDS and self.regularizer is Regularizer.L2

    @property
    def l1_strength(self) -> float:
        """Weight of the nonsmooth ``||w||_1`` part (0 under L2)."""
        return self.lam if self.regularizer is Regularizer.L1 else 0.0

    def pointwise(self, z, y):
        """Elementwise ``(loss, dloss/dz)`` at margins ``z`` and labels ``y``."""
        return _POINTWISE[self.kind](z, y, self._param)

    def margins(self, w) -> np.ndarray:
        return self.X @ self._check(w)

    def reg_value(self, w) -> float:
        if self.regularizer is Regularizer.L2:
            return 0.5 * self.lam * float(w @ w)
        return self.lam * float(np.abs(w).sum())

    def reg_grad(self, w) -> np.ndarray:
        if self.regularizer is Regularizer.L2:
            return self.lam * w
        return self.lam * np.sign(w)

    def data_eval(self, w):
        """Data term only: ``(sum_i loss_i, gradient)``."""
        z = self.margins(w)
        vals, d = self.pointwise(z, self.y)
        return float(vals.sum()), self.X.T @ d

    def smooth_eval(self, w):
        """The differentiable part: everything except an L1 penalty."""
        if self.regularizer is Regularizer.L1:
            return self.data_eval(w)
        return self.eval(w)

    def eval(self, w):
        w = self._check(w)
        f, g = self.data_eval(w)
        return f + self.reg_value(w), g + self.reg_grad(w)

    def hessp(self, w, v):
        if not self.supports_hessian:
            raise UnsupportedOperationError(
                f"Hessian-vector product unavailable for {self.name}")
        w = self._check(w)
        v = self._check(v)
        dcurv = _curvature(self.kind, self.X @ w, self.y, self.svr_epsilon)
        return self.X.T @ (dcurv * (self.X @ v)) + self.lam * v

    def example_derivatives(self, w, rows) -> np.ndarray:
        """``dloss_i/dz`` for the given example ids at ``w``."""
        rows = np.asarray(rows, dtype=np.int64)
        z = np.array([w[self.rows[i][0]] @ self.rows[i][1] for i in rows.tolist()])
        return self.pointwise(z, self.y[rows])[1]

    def batch_data_grad(self, w, rows) -> np.ndarray:
        """Sum of the per-example data gradients over ``rows``."""
        g = np.zeros(self.dimension)
        d = self.example_derivatives(w, rows)
        for i, di in zip(np.asarray(rows).tolist(), d.tolist()):
            idx, val = self.rows[i]
            g[idx] += di * val
        return g


LOSS_NAMES = {
    f"{reg.value}{kind.value}Loss": (kind, reg)
    for kind in LossKind for reg in Regularizer
}


def make_loss(name: str, data: Dataset, lam: float = 1.0, **kwargs) -> RegularizedLoss:
    """Build a loss by its catalog name, e.g. ``"L1LogisticLoss"``."""
    try:
        kind, reg = LOSS_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown loss {name!r}; choose from {sorted(LOSS_NAMES)}") from None
    return RegularizedLoss(data, lam, reg, kind, **kwargs)


def convex_midpoint_check(loss: DifferentiableFunction, a, b) -> bool:
    fa, fb = loss.value(a), loss.value(b)
    fm = loss.value(0.5 * (np.asarray(a) + np.asarray(b)))
    return fm <= 0.5 * (fa + fb) + 1e-9 * (1.0 + abs(fa) + abs(fb))
