"""
Batch solvers on an L2-regularized logistic problem
===================================================

Seven deterministic solvers minimize the same objective. They share one
configuration object; ``max_eval`` counts function evaluations.
"""

import numpy as np

from linopt import BATCH_SOLVERS, LossKind, Regularizer, RegularizedLoss, SolverConfig
from linopt.synthetic import make_classification

data = make_classification(n=200, m=10, seed=7)
loss = RegularizedLoss(data, 1.0, Regularizer.L2, LossKind.LOGISTIC)

# plain gd needs a step below 2/L; L is bounded by ||X||^2 / 4 + lam
X = data.to_csr().toarray()
L = 0.25 * np.linalg.norm(X, 2) ** 2 + 1.0
print(f"curvature bound L = {L:.2f}")

for name, solver in BATCH_SOLVERS.items():
    if name == "lbfgsMinOwl":
        continue   # needs an L1 objective, see the next demo
    cfg = SolverConfig(alpha=1.0 / L if name == "gd" else 1.0, tol=1e-6, max_eval=5000)
    res = solver(loss, np.zeros(10), cfg)
    print(f"{name:18s} f={res.f:.10f} evals={res.evaluations:5d} {res.terminated.value}")

# the trace keeps (evaluation count, f) for every accepted iterate
res = BATCH_SOLVERS["lbfgsMin"](loss, np.zeros(10), SolverConfig(tol=1e-6))
for k, f in res.trace[:5]:
    print(k, f)
