"""Command-line front end: ``train``, ``predict`` and ``bench``.

Flags are single-dash long names (``-method 3 -algtype 0 -reg 0.25``).
If the first argument is a flag rather than a subcommand, ``train`` is
assumed, so the classic invocation works unchanged::

    linopt -method 3 -algtype 0 -reg 0.25 -nClasses 20 -maxIter 1000 \\
        -startwith1 true -trainFeatureFile a.feat -trainLabelFile a.label \\
        -testFeatureFile a.feat -testLabelFile a.label

Exit codes: 0 success, 1 usage error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import List, Optional

import numpy as np

from . import dataio
from .batch_opt import SolverConfig
from .dataio import Dataset, ParseError, format_number
from .losses import LossKind, Regularizer
from .ml import (ALGTYPES, ClassifierSpec, ConfigurationError, ModelFormatError,
                 inapplicable_reason, load_model, mean_squared_error,
                 predict_accuracy, save_model, solver_name, train)
from .stochastic_opt import STOCHASTIC_SOLVERS, StochasticConfig

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

METHODS = {
    0: (LossKind.LOGISTIC, Regularizer.L2),
    1: (LossKind.HINGE_SVM, Regularizer.L2),
    2: (LossKind.SMOOTH_SVM, Regularizer.L2),
    3: (LossKind.SMOOTH_SVM, Regularizer.L1),
    4: (LossKind.LOGISTIC, Regularizer.L1),
    5: (LossKind.HINGE_SVM, Regularizer.L1),
    6: (LossKind.LEAST_SQUARES, Regularizer.L2),
    7: (LossKind.LEAST_SQUARES, Regularizer.L1),
    8: (LossKind.PROBIT, Regularizer.L2),
    9: (LossKind.PROBIT, Regularizer.L1),
    10: (LossKind.HUBER_SVM, Regularizer.L2),
    11: (LossKind.HUBER_SVM, Regularizer.L1),
    12: (LossKind.HINGE_SVR, Regularizer.L2),
    13: (LossKind.HINGE_SVR, Regularizer.L1),
    14: (LossKind.SMOOTH_SVR, Regularizer.L2),
    15: (LossKind.SMOOTH_SVR, Regularizer.L1),
}

# (display name, loss kind, dual formulation?); all L2-regularized
BENCH_OBJECTIVES = {
    "logistic": ("Logistic Regression", LossKind.LOGISTIC, False),
    "l2svm-primal": ("L2-SVM, Primal", LossKind.SMOOTH_SVM, False),
    "l2svm-dual": ("L2-SVM, Dual", LossKind.SMOOTH_SVM, True),
    "l1svm-primal": ("L1-SVM, Primal", LossKind.HINGE_SVM, False),
    "l1svm-dual": ("L1-SVM, Dual", LossKind.HINGE_SVM, True),
}
BENCH_DEFAULT_SOLVERS = ("lbfgsMin", "tron", "svcDual")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def _get_option_tuples(self, option_string):
        # allow_abbrev=False does not stop prefix matching of single-dash
        # options on older Pythons; exact spellings only
        return []

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _method_help() -> str:
    rows = [f"{k}={reg.value}-{kind.value}" for k, (kind, reg) in METHODS.items()]
    return "objective selector: " + ", ".join(rows)


def _algtype_help() -> str:
    return "solver selector: " + ", ".join(f"{k}={v}" for k, v in ALGTYPES.items())


def _add_common(p: argparse.ArgumentParser, training: bool = True):
    p.add_argument("-startwith1", type=_bool, default=True, metavar="BOOL",
                   help="feature ids in files are 1-based (default true)")
    p.add_argument("-testFeatureFile")
    p.add_argument("-testLabelFile")
    p.add_argument("-testFile", help="combined LIBSVM test file")
    if not training:
        return
    p.add_argument("-method", type=int, default=0, help=_method_help())
    p.add_argument("-algtype", type=int, default=1, help=_algtype_help())
    p.add_argument("-reg", type=float, default=1.0, help="regularization strength lambda")
    p.add_argument("-nClasses", type=int, default=2)
    p.add_argument("-maxIter", type=int, default=1000,
                   help="evaluation budget (batch), epochs (stochastic, svcDual)")
    p.add_argument("-tol", type=float, default=0.01)
    p.add_argument("-seed", type=int, default=0)
    p.add_argument("-alpha", type=float, default=1.0, help="initial step size")
    p.add_argument("-stepSize", type=float, default=0.01, help="stochastic step size")
    p.add_argument("-decayRate", type=float, default=1e-3)
    p.add_argument("-miniBatch", type=int, default=1)
    p.add_argument("-lbfgsMemory", type=int, default=100)
    p.add_argument("-trainFeatureFile")
    p.add_argument("-trainLabelFile")
    p.add_argument("-trainFile", help="combined LIBSVM training file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linopt", description="Train and evaluate linear models.",
                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    p_train = sub.add_parser("train", allow_abbrev=False, help="train, optionally test")
    _add_common(p_train)
    p_train.add_argument("-modelOut")
    p_pred = sub.add_parser("predict", allow_abbrev=False, help="apply a saved model")
    _add_common(p_pred, training=False)
    p_pred.add_argument("-modelIn", required=True)
    p_bench = sub.add_parser("bench", allow_abbrev=False,
                             help="time objective x solver pairs")
    _add_common(p_bench)
    p_bench.add_argument("-objectives", default=",".join(BENCH_OBJECTIVES),
                         help="comma list from: " + ", ".join(BENCH_OBJECTIVES))
    p_bench.add_argument("-solvers", default=",".join(BENCH_DEFAULT_SOLVERS),
                         help="comma list of solver names or algtype ids")
    return parser


def _load(opts, role: str, need_labels: bool, num_features=None) -> Optional[Dataset]:
    base = 1 if opts.startwith1 else 0
    combined = getattr(opts, f"{role}File", None)
    feat = getattr(opts, f"{role}FeatureFile", None)
    lab = getattr(opts, f"{role}LabelFile", None)
    if combined and (feat or lab):
        raise UsageError(f"give either -{role}File or -{role}FeatureFile/-{role}LabelFile")
    if combined:
        return dataio.read_libsvm(combined, base, num_features)
    if feat is None:
        if lab is not None:
            raise UsageError(f"-{role}LabelFile needs -{role}FeatureFile")
        return None
    examples, n, m = dataio.read_feature_file(feat, base, num_features)
    if lab is None:
        if need_labels:
            raise UsageError(f"-{role}FeatureFile needs -{role}LabelFile")
        return Dataset(examples, np.full(n, np.nan), m)
    return Dataset(examples, dataio.read_label_file(lab, n), m)


def _spec(opts, kind, reg, solver) -> ClassifierSpec:
    if solver in STOCHASTIC_SOLVERS:
        cfg = StochasticConfig(step_size=opts.stepSize, decay_rate=opts.decayRate,
                               epochs=opts.maxIter, mini_batch_size=opts.miniBatch,
                               seed=opts.seed)
    else:
        cfg = SolverConfig(alpha=opts.alpha, max_eval=opts.maxIter, tol=opts.tol,
                           memory=opts.lbfgsMemory)
    return ClassifierSpec(kind, reg, opts.reg, solver, cfg, opts.nClasses, seed=opts.seed)


def _report(model, test: Dataset, out) -> None:
    if model.task == "regression":
        print(f"mse {format_number(mean_squared_error(model, test))}", file=out)
    else:
        print(f"accuracy {format_number(predict_accuracy(model, test))}", file=out)


def run_train(opts, out=sys.stdout) -> int:
    if opts.method not in METHODS:
        raise UsageError(f"unknown -method {opts.method}")
    kind, reg = METHODS[opts.method]
    spec = _spec(opts, kind, reg, solver_name(opts.algtype))
    data = _load(opts, "train", need_labels=True)
    if data is None:
        raise UsageError("training data required: -trainFile or "
                         "-trainFeatureFile with -trainLabelFile")
    test = _load(opts, "test", need_labels=True)
    model = train(spec, data)
    if opts.modelOut:
        save_model(model, opts.modelOut)
    if test is not None:
        _report(model, test, out)
    return EXIT_OK


def run_predict(opts, out=sys.stdout) -> int:
    model = load_model(opts.modelIn)
    test = _load(opts, "test", need_labels=False)
    if test is None:
        raise UsageError("test data required: -testFile or -testFeatureFile")
    for label in model.predict_dataset(test):
        print(format_number(label), file=out)
    if not np.isnan(test.labels).any():
        _report(model, test, out)
    return EXIT_OK


def run_bench(opts, out=sys.stdout) -> int:
    objectives = [o.strip().lower() for o in opts.objectives.split(",") if o.strip()]
    for o in objectives:
        if o not in BENCH_OBJECTIVES:
            raise UsageError(f"unknown objective {o!r}")
    solvers = []
    for s in opts.solvers.split(","):
        s = s.strip()
        solvers.append(solver_name(int(s)) if s.isdigit() else solver_name(s))
    data = _load(opts, "train", need_labels=True)
    if data is None:
        raise UsageError("bench needs training data")
    print("objective\tsolver\tseconds\tobjective_value\ttrain_accuracy", file=out)
    for key in objectives:
        display, kind, dual = BENCH_OBJECTIVES[key]
        for solver in solvers:
            supported = (solver == "svcDual") == dual and \
                inapplicable_reason(kind, Regularizer.L2, solver) is None
            if not supported:
                print(f"{display}\t{solver}\t*\t*\t*", file=out)
                continue
            spec = _spec(opts, kind, Regularizer.L2, solver)
            start = time.perf_counter()
            model = train(spec, data)
            elapsed = time.perf_counter() - start
            f = model.results[0].f
            acc = predict_accuracy(model, data)
            print(f"{display}\t{solver}\t{elapsed:.4f}\t{f:.10g}\t{format_number(acc)}",
                  file=out)
    return EXIT_OK


_COMMANDS = {"train": run_train, "predict": run_predict, "bench": run_bench}


def main(argv: Optional[List[str]] = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = sys.stdout if out is None else out
    if argv and argv[0].startswith("-") and argv[0] not in ("-h", "--help"):
        argv.insert(0, "train")
    parser = build_parser()
    try:
        opts = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if opts.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[opts.command](opts, out)
    except (UsageError, ConfigurationError) as exc:
        parser.print_usage(sys.stderr)
        print(f"linopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ModelFormatError, OSError, ValueError) as exc:
        print(f"linopt: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
