"""
Linear SVMs by dual coordinate descent
======================================

The dual solver works with ``C * sum loss + 0.5 ||w||^2``. Setting
``C = 1 / lam`` makes it comparable with the primal solvers.
"""

import numpy as np

from linopt import LossKind, Regularizer, RegularizedLoss, SolverConfig
from linopt.batch_opt import lbfgs_min
from linopt.dual_opt import svc_dual, to_lambda_objective
from linopt.synthetic import make_classification

data = make_classification(n=200, m=10, noise=1.0, seed=5)
lam = 0.5
C = 1.0 / lam

dual = svc_dual(data, "L2SVM", C=C, tol=1e-6, check_invariants=True)
primal = lbfgs_min(RegularizedLoss(data, lam, Regularizer.L2, LossKind.SMOOTH_SVM),
                   np.zeros(10), SolverConfig(tol=1e-8))
print("L2-SVM primal", primal.f, "dual (converted)", to_lambda_objective(dual.f, C))
print("epochs", dual.evaluations, "support vectors", np.count_nonzero(dual.info["alpha"]))

# the dual objective only increases, and stays below the primal one
hinge = svc_dual(data, "L1SVM", C=C, tol=1e-6)
print("L1-SVM dual trace", np.round(hinge.info["dual_trace"][:5], 4), "primal", hinge.f)
alpha = hinge.info["alpha"]
print("alphas at the upper bound C:", np.count_nonzero(alpha == C))
