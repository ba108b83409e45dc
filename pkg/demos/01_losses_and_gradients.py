"""
Losses, regularizers and a gradient check
=========================================

Every objective is ``sum_i loss(y_i, w.x_i) + lam * R(w)``. Here we build a
few of them on a small random dataset and compare the analytic gradient
with central differences.
"""

import numpy as np

from linopt import LossKind, Regularizer, RegularizedLoss, make_loss
from linopt.synthetic import make_classification

data = make_classification(n=30, m=4, seed=0)
rng = np.random.default_rng(1)
w = rng.standard_normal(4)

# objectives can be built from the enums ...
loss = RegularizedLoss(data, lam=0.5, regularizer=Regularizer.L2, kind=LossKind.PROBIT)
f, g = loss.eval(w)
print(loss.name, "f =", f)

# ... or by name
for name in ["L2LogisticLoss", "L2SmoothSVMLoss", "L2HuberSVMLoss"]:
    c = make_loss(name, data, 0.5)
    f, g = c.eval(w)
    h = 1e-6
    fd = np.array([(c.value(w + h * e) - c.value(w - h * e)) / (2 * h) for e in np.eye(4)])
    print(f"{name:18s} f={f:10.5f}  max |fd - g| = {np.abs(fd - g).max():.2e}")

# the L1 objectives expose their smooth part separately
l1 = make_loss("L1LogisticLoss", data, 0.5)
print("smooth part", l1.smooth_eval(w)[0], "+ l1 term", l1.reg_value(w), "=", l1.value(w))
