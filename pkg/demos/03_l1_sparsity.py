"""
Sparse models with OWL-QN and dual averaging
============================================

With an L1 penalty the optimum has exact zeros. Above ``lam_max`` (the
largest absolute data-gradient entry at w = 0) every weight is zero.
"""

import numpy as np

from linopt import LossKind, Regularizer, RegularizedLoss, SolverConfig, StochasticConfig
from linopt.batch_opt import lbfgs_min_owl
from linopt.stochastic_opt import (sgd_regularized_dual_averaging,
                                   sgd_regularized_dual_averaging_adagrad)
from linopt.synthetic import make_classification

# 20 features, only 5 carry signal
data = make_classification(n=200, m=20, n_informative=5, seed=3)
probe = RegularizedLoss(data, 0.0, Regularizer.L1, LossKind.LOGISTIC)
lam_max = np.abs(probe.data_eval(np.zeros(20))[1]).max()
print("lam_max =", lam_max)

for frac in [1.01, 0.5, 0.1, 0.01]:
    loss = RegularizedLoss(data, frac * lam_max, Regularizer.L1, LossKind.LOGISTIC)
    res = lbfgs_min_owl(loss, np.zeros(20), SolverConfig(tol=1e-6, max_eval=5000))
    print(f"lam = {frac:5.2f} lam_max: {np.count_nonzero(res.w)} nonzeros, f = {res.f:.4f}")

loss = RegularizedLoss(data, 0.5 * lam_max, Regularizer.L1, LossKind.LOGISTIC)
owl = lbfgs_min_owl(loss, np.zeros(20), SolverConfig(tol=1e-6, max_eval=5000))
rda = sgd_regularized_dual_averaging(loss, np.zeros(20), StochasticConfig(epochs=200))
ada = sgd_regularized_dual_averaging_adagrad(
    loss, np.zeros(20), StochasticConfig(step_size=0.3, epochs=200))
print("support OWL-QN     ", np.flatnonzero(owl.w))
print("support RDA        ", np.flatnonzero(rda.w))
print("support RDA-AdaGrad", np.flatnonzero(ada.w))
print("objectives", owl.f, rda.f, ada.f)
