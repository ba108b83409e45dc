"""Stochastic solvers for regularized linear-model losses.

Each epoch visits a fresh seeded permutation of the examples in
mini-batches. For a batch ``B`` of size ``b`` the stochastic gradient is::

    g_hat = sum_{i in B} grad loss_i(w) + (b / n) * lam * grad R(w)

so ``n / b`` updates apply the regularizer roughly once per epoch and the
fixed point matches the batch objective. SAG and the dual-averaging
methods work on the per-example mean (objective divided by ``n``), which
keeps their step-size parameters on a scale independent of ``n``.

The returned iterate is the last one, not an average. ``evaluations``
counts mini-batch gradient computations; ``trace`` holds one
``(epoch, objective)`` pair per epoch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .batch_opt import SolverResult, Termination
from .linalg import DimensionMismatchError
from .losses import Regularizer, UnsupportedOperationError


@dataclass(frozen=True)
class StochasticConfig:
    step_size: float = 1e-2
    decay_rate: float = 1e-3
    epochs: int = 50
    mini_batch_size: int = 1
    seed: int = 0
    adagrad_eps: float = 1e-8
    rda_gamma: float = 1.0

    def __post_init__(self):
        if not self.step_size >= 0:
            raise ValueError("step_size must be >= 0")
        if not self.decay_rate >= 0:
            raise ValueError("decay_rate must be >= 0")
        if int(self.epochs) < 1:
            raise ValueError("epochs must be >= 1")
        if int(self.mini_batch_size) < 1:
            raise ValueError("mini_batch_size must be >= 1")
        if not self.adagrad_eps >= 0:
            raise ValueError("adagrad_eps must be >= 0")
        if not self.rda_gamma > 0:
            raise ValueError("rda_gamma must be > 0")


def minibatches(rng: np.random.Generator, n: int, batch_size: int):
    """Yield index arrays covering one random permutation of ``range(n)``."""
    perm = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield perm[start:start + batch_size]


def _setup(loss, x0):
    w = np.array(x0, dtype=np.float64)
    if w.shape != (loss.dimension,):
        raise DimensionMismatchError(
            f"x0 has shape {w.shape}, function dimension is {loss.dimension}")
    return w


def _result(loss, w, updates, trace, **info):
    f, g = loss.eval(w)
    return SolverResult(w, f, updates, Termination.BUDGET_EXHAUSTED, trace,
                        float(np.linalg.norm(g)), info)


def _stochastic_grad(loss, w, batch):
    n = loss.n_examples
    return loss.batch_data_grad(w, batch) + (len(batch) / n) * loss.reg_grad(w)


def _sgd_run(loss, x0, cfg: StochasticConfig, schedule):
    w = _setup(loss, x0)
    rng = np.random.default_rng(cfg.seed)
    t = 0
    trace = []
    for epoch in range(cfg.epochs):
        for batch in minibatches(rng, loss.n_examples, cfg.mini_batch_size):
            w -= schedule(t) * _stochastic_grad(loss, w, batch)
            t += 1
        trace.append((epoch + 1, loss.value(w)))
    return _result(loss, w, t, trace)


def sgd(loss, x0, cfg: StochasticConfig) -> SolverResult:
    """SGD with the constant step ``cfg.step_size``."""
    return _sgd_run(loss, x0, cfg, lambda t: cfg.step_size)


def decayed_step(step_size, decay_rate, t):
    return step_size / (1.0 + decay_rate * t)


def sgd_decaying_learning_rate(loss, x0, cfg: StochasticConfig) -> SolverResult:
    """SGD with step ``eta / (1 + decay_rate * t)``, ``t`` the update count."""
    return _sgd_run(loss, x0, cfg,
                    lambda t: decayed_step(cfg.step_size, cfg.decay_rate, t))


def sgd_adagrad(loss, x0, cfg: StochasticConfig) -> SolverResult:
    w = _setup(loss, x0)
    rng = np.random.default_rng(cfg.seed)
    G = np.zeros_like(w)
    t = 0
    trace = []
    for epoch in range(cfg.epochs):
        for batch in minibatches(rng, loss.n_examples, cfg.mini_batch_size):
            g = _stochastic_grad(loss, w, batch)
            G += g * g
            w -= cfg.step_size * g / (cfg.adagrad_eps + np.sqrt(G))
            t += 1
        trace.append((epoch + 1, loss.value(w)))
    return _result(loss, w, t, trace)


def sgd_stochastic_average_gradient(loss, x0, cfg: StochasticConfig,
                                    check_invariants: bool = False) -> SolverResult:
    """Stochastic average gradient for L2-regularized linear losses.

    One scalar ``d_i = dloss_i/dz`` is stored per example, and the running
    sum ``a = sum_i d_i x_i`` is updated incrementally. Each step moves along
    ``(a + lam * w) / n``.
    """
    if loss.regularizer is not Regularizer.L2:
        raise UnsupportedOperationError("SAG needs an L2 regularizer; use RDA for L1")
    w = _setup(loss, x0)
    n = loss.n_examples
    rng = np.random.default_rng(cfg.seed)
    d = np.zeros(n)
    a = np.zeros_like(w)
    t = 0
    trace = []
    drift = 0.0
    for epoch in range(cfg.epochs):
        for batch in minibatches(rng, n, cfg.mini_batch_size):
            fresh = loss.example_derivatives(w, batch)
            for i, di in zip(batch.tolist(), fresh.tolist()):
                idx, val = loss.rows[i]
                a[idx] += (di - d[i]) * val
                d[i] = di
            w -= cfg.step_size * (a + loss.reg_grad(w)) / n
            t += 1
        if check_invariants:
            exact = loss.X.T @ d
            scale = max(float(np.abs(exact).max(initial=0.0)), 1.0)
            drift = max(drift, float(np.abs(a - exact).max(initial=0.0)) / scale)
            assert drift <= 1e-10, f"SAG gradient memory drifted by {drift:.3e}"
        trace.append((epoch + 1, loss.value(w)))
    return _result(loss, w, t, trace, stored_derivatives=d, gradient_sum=a,
                   max_memory_drift=drift)


def _require_l1(loss):
    if loss.regularizer is not Regularizer.L1:
        raise UnsupportedOperationError("dual averaging here targets L1-regularized losses")


def rda_update(gbar, lam, t, gamma):
    """Closed-form RDA iterate from the averaged gradient ``gbar``.

    Coordinates with ``|gbar_j| <= lam`` are exactly zero.
    """
    gbar = np.asarray(gbar, dtype=np.float64)
    w = -(np.sqrt(t) / gamma) * (gbar - lam * np.sign(gbar))
    w[np.abs(gbar) <= lam] = 0.0
    return w


def rda_adagrad_update(gbar, sq_sum, lam, t, eps, step_size=1.0):
    """AdaGrad-scaled RDA iterate; ``sq_sum`` is the per-coordinate sum of
    squared stochastic gradients so far."""
    gbar = np.asarray(gbar, dtype=np.float64)
    H = eps + np.sqrt(sq_sum)
    active = np.abs(gbar) > lam
    w = np.zeros_like(gbar)
    w[active] = -(step_size * t / H[active]) * (
        gbar[active] - lam * np.sign(gbar[active]))
    return w


def _rda_run(loss, x0, cfg: StochasticConfig, adagrad: bool):
    _require_l1(loss)
    w = _setup(loss, x0)
    n = loss.n_examples
    lam = loss.lam / n
    rng = np.random.default_rng(cfg.seed)
    gbar = np.zeros_like(w)
    sq = np.zeros_like(w)
    t = 0
    trace = []
    for epoch in range(cfg.epochs):
        for batch in minibatches(rng, n, cfg.mini_batch_size):
            g = loss.batch_data_grad(w, batch) / len(batch)
            t += 1
            gbar += (g - gbar) / t
            if adagrad:
                sq += g * g
                w = rda_adagrad_update(gbar, sq, lam, t, cfg.adagrad_eps, cfg.step_size)
            else:
                w = rda_update(gbar, lam, t, cfg.rda_gamma)
        trace.append((epoch + 1, loss.value(w)))
    return _result(loss, w, t, trace, averaged_gradient=gbar)


def sgd_regularized_dual_averaging(loss, x0, cfg: StochasticConfig) -> SolverResult:
    """Regularized dual averaging for L1 losses (scaling ``cfg.rda_gamma``)."""
    return _rda_run(loss, x0, cfg, adagrad=False)


def sgd_regularized_dual_averaging_adagrad(loss, x0, cfg: StochasticConfig) -> SolverResult:
    """Dual averaging with per-coordinate AdaGrad scaling and step ``cfg.step_size``."""
    return _rda_run(loss, x0, cfg, adagrad=True)


STOCHASTIC_SOLVERS = {
    "sgd": sgd,
    "sgdDecayingLearningRate": sgd_decaying_learning_rate,
    "sgdAdagrad": sgd_adagrad,
    "sgdStochasticAverageGradient": sgd_stochastic_average_gradient,
    "sgdRegularizedDualAveraging": sgd_regularized_dual_averaging,
    "sgdRegularizedDualAveragingAdagrad": sgd_regularized_dual_averaging_adagrad,
}
