"""
Classifiers, multiclass and cross-validation
============================================

``ClassifierSpec`` ties a loss to a solver. Multiclass problems are
handled one-vs-rest; labels keep their original values.
"""

import io

from linopt import ClassifierSpec, LossKind, Regularizer, SolverConfig
from linopt.ml import cross_validate, load_model, predict_accuracy, save_model, train
from linopt.synthetic import make_multiclass

data = make_multiclass(n=300, m=6, n_classes=4, seed=2)
spec = ClassifierSpec(LossKind.LOGISTIC, Regularizer.L2, lam=0.1, algtype="lbfgsMin",
                      config=SolverConfig(tol=1e-4), n_classes=4)
model = train(spec, data)
print("weights", model.weights.shape, "classes", model.class_labels)
print("training accuracy", predict_accuracy(model, data))

mean, folds = cross_validate(spec, data, folds=5, seed=0)
print("5-fold accuracy", round(mean, 4), [round(a, 3) for a in folds])

# an L1-regularized squared-hinge model trained with OWL-QN (algtype 0)
sparse = ClassifierSpec(LossKind.SMOOTH_SVM, Regularizer.L1, lam=5.0, algtype=0, n_classes=4)
print("OWL-QN accuracy", predict_accuracy(train(sparse, data), data))

# models are plain text
buf = io.StringIO()
save_model(model, buf)
print(buf.getvalue().splitlines()[0], "...")
again = load_model(io.StringIO(buf.getvalue()))
print("reloaded accuracy", predict_accuracy(again, data))
