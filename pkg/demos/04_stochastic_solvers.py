"""
Stochastic solvers
==================

SGD variants pass over a seeded permutation of the examples each epoch.
The trace records the full objective at the end of every epoch.
"""

import numpy as np

from linopt import LossKind, Regularizer, RegularizedLoss, SolverConfig, StochasticConfig
from linopt.batch_opt import lbfgs_min
from linopt.stochastic_opt import STOCHASTIC_SOLVERS
from linopt.synthetic import make_classification

data = make_classification(n=200, m=10, seed=7)
loss = RegularizedLoss(data, 1.0, Regularizer.L2, LossKind.LOGISTIC)
best = lbfgs_min(loss, np.zeros(10), SolverConfig(tol=1e-8)).f

X = data.to_csr().toarray()
sag_step = 1.0 / (4 * np.max(np.sum(X * X, axis=1)) + 1.0)
settings = {
    "sgd": 0.01,
    "sgdDecayingLearningRate": 0.05,
    "sgdAdagrad": 0.5,
    "sgdStochasticAverageGradient": sag_step,
}
for name, eta in settings.items():
    cfg = StochasticConfig(step_size=eta, epochs=100, seed=0)
    res = STOCHASTIC_SOLVERS[name](loss, np.zeros(10), cfg)
    gaps = [f - best for _, f in res.trace]
    print(f"{name:30s} gap after 1/10/100 epochs: "
          f"{gaps[0]:.2e} {gaps[9]:.2e} {gaps[99]:.2e}")

# mini-batches of the full size reduce sgd to gradient descent
res = STOCHASTIC_SOLVERS["sgd"](loss, np.zeros(10),
                                StochasticConfig(step_size=0.01, epochs=3, mini_batch_size=200))
print("one update per epoch:", res.evaluations, "updates")
