"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed
through pytest's capture) or directly with ``python3 tests/test_acceptance.py``.
"""

import contextlib
import io
import os
import sys
import time

import numpy as np
import pytest

from linopt import data_path
from linopt.batch_opt import BATCH_SOLVERS, SolverConfig, lbfgs_min_owl
from linopt.cli import BENCH_OBJECTIVES, build_parser, main
from linopt.dataio import Dataset, read_libsvm, write_libsvm
from linopt.dual_opt import svc_dual
from linopt.linalg import SparseExample
from linopt.losses import LossKind, RegularizedLoss, Regularizer
from linopt.ml import ClassifierSpec, predict_accuracy, train
from linopt.stochastic_opt import (STOCHASTIC_SOLVERS, StochasticConfig,
                                   sgd_regularized_dual_averaging,
                                   sgd_regularized_dual_averaging_adagrad)
from linopt.synthetic import make_classification, make_regression

from oracles import central_difference_gradient, dense, ista_l1_logistic, svm_dual_grid
from toys import l1_toy

SMOOTH_KINDS = [LossKind.LEAST_SQUARES, LossKind.LOGISTIC, LossKind.PROBIT,
                LossKind.SMOOTH_SVM, LossKind.HUBER_SVM, LossKind.SMOOTH_SVR]
IJCNN1 = os.environ.get("IJCNN1_PATH", os.path.join(os.path.dirname(__file__), "data", "ijcnn1"))


@contextlib.contextmanager
def criterion(capsys, number, title, limit):
    """Time the body, print one PASS/FAIL line, re-raise any failure."""
    start = time.perf_counter()
    note = []
    try:
        yield note
        elapsed = time.perf_counter() - start
        assert elapsed < limit, f"took {elapsed:.1f}s, limit {limit}s"
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        with capsys.disabled():
            print(f"\nFAIL  criterion {number}: {title} ({elapsed:.1f}s) :: {exc}")
        raise
    extra = f" [{'; '.join(note)}]" if note else ""
    with capsys.disabled():
        print(f"\nPASS  criterion {number}: {title} ({elapsed:.1f}s){extra}")


def _data_for(kind, n, m, seed):
    if kind.is_classification:
        return make_classification(n, m, seed=seed)
    return make_regression(n, m, seed=seed)


def test_criterion_1_gradient_oracle(capsys):
    with criterion(capsys, 1, "finite differences match analytic gradients", 5):
        rng = np.random.default_rng(101)
        worst = 0.0
        for kind in SMOOTH_KINDS:
            loss = RegularizedLoss(_data_for(kind, 10, 5, 11), 0.7, Regularizer.L2, kind)
            for _ in range(20):
                w = rng.standard_normal(5)
                g = loss.eval(w)[1]
                fd = central_difference_gradient(loss.value, w, h=1e-6)
                err = np.max(np.abs(fd - g) / np.maximum(1.0, np.maximum(np.abs(fd), np.abs(g))))
                worst = max(worst, err)
                assert err <= 1e-5, f"{kind.value}: relative error {err:.2e}"
        assert worst <= 1e-5


def test_criterion_2_convexity(capsys):
    with criterion(capsys, 2, "midpoint convexity for all 16 losses", 30):
        rng = np.random.default_rng(202)
        for kind in LossKind:
            for reg in Regularizer:
                loss = RegularizedLoss(_data_for(kind, 12, 4, 13), 0.5, reg, kind)
                for _ in range(1000):
                    a, b = rng.standard_normal((2, 4)) * rng.choice([0.1, 1.0, 10.0])
                    fa, fb = loss.value(a), loss.value(b)
                    fm = loss.value(0.5 * (a + b))
                    # slack for rounding in the sums only
                    assert fm <= 0.5 * (fa + fb) + 1e-12 * (1.0 + abs(fa) + abs(fb)), \
                        f"{reg.value}-{kind.value}"


def test_criterion_3_cross_solver_agreement(capsys):
    with criterion(capsys, 3, "nine solvers agree on L2-logistic", 60) as note:
        data = make_classification(200, 10, seed=7)
        X, _ = dense(data)
        lam = 1.0
        lipschitz = 0.25 * np.linalg.norm(X, 2) ** 2 + lam
        max_sq = float(np.max(np.sum(X * X, axis=1)))
        batch = {name: SolverConfig(tol=0.01, max_eval=100000) for name in
                 ["gdLineSearch", "gdBarzilaiBorwein", "gdNesterov", "lbfgsMin", "tron"]}
        batch["gd"] = SolverConfig(alpha=1.0 / lipschitz, tol=0.01, max_eval=100000)
        stochastic = {
            "sgd": StochasticConfig(step_size=0.01, epochs=300),
            "sgdAdagrad": StochasticConfig(step_size=0.5, epochs=300),
            "sgdStochasticAverageGradient":
                StochasticConfig(step_size=1.0 / (4 * max_sq + lam), epochs=300),
        }
        accs, fs = {}, {}
        for name, cfg in {**batch, **stochastic}.items():
            model = train(ClassifierSpec(LossKind.LOGISTIC, Regularizer.L2, lam, name, cfg), data)
            accs[name] = predict_accuracy(model, data)
            if name in batch:
                assert model.results[0].converged, name
                fs[name] = model.results[0].f
        rounded = {name: float(f"{a:.2g}") for name, a in accs.items()}
        assert len(set(rounded.values())) == 1, f"accuracies {accs}"
        spread = (max(fs.values()) - min(fs.values())) / min(fs.values())
        assert spread <= 1e-4, f"objectives {fs}"
        note.append(f"accuracy {accs['lbfgsMin']}, objective spread {spread:.1e}")


def test_criterion_4_primal_dual(capsys):
    with criterion(capsys, 4, "primal and dual SVM training agree", 30) as note:
        data = make_classification(200, 10, seed=7)
        lam = 1.0
        pairs = [(LossKind.SMOOTH_SVM, SolverConfig(tol=1e-6, max_eval=10000), 1e-4),
                 # subgradient primal for the hinge loss; it ends at a kink
                 (LossKind.HINGE_SVM, SolverConfig(tol=1e-8, max_eval=20000), 1e-3)]
        for kind, primal_cfg, rtol in pairs:
            primal = train(ClassifierSpec(kind, Regularizer.L2, lam, "lbfgsMin", primal_cfg), data)
            dual = train(ClassifierSpec(kind, Regularizer.L2, lam, "svcDual",
                                        SolverConfig(tol=1e-6, max_eval=10000)), data)
            assert dual.results[0].converged
            fp, fd = primal.results[0].f, dual.results[0].f
            gap = abs(fp - fd) / abs(fd)
            assert gap <= rtol, f"{kind.value}: {fp} vs {fd}"
            np.testing.assert_array_equal(primal.predict_dataset(data), dual.predict_dataset(data))
            note.append(f"{kind.value} gap {gap:.1e}")


def test_criterion_5_l1_sparsity(capsys):
    with criterion(capsys, 5, "L1 solvers give sparse weights, OWL-QN matches ISTA", 60) as note:
        data = l1_toy()
        probe = RegularizedLoss(data, 0.0, Regularizer.L1, LossKind.LOGISTIC)
        lam = 0.5 * float(np.max(np.abs(probe.data_eval(np.zeros(probe.dimension))[1])))
        loss = RegularizedLoss(data, lam, Regularizer.L1, LossKind.LOGISTIC)
        m = loss.dimension
        owl = lbfgs_min_owl(loss, np.zeros(m), SolverConfig(tol=1e-6, max_eval=5000))
        rda = sgd_regularized_dual_averaging(loss, np.zeros(m), StochasticConfig(epochs=300))
        rda_ada = sgd_regularized_dual_averaging_adagrad(
            loss, np.zeros(m), StochasticConfig(step_size=0.3, epochs=300))
        for name, res in [("OWL-QN", owl), ("RDA", rda), ("RDA-AdaGrad", rda_ada)]:
            frac = np.count_nonzero(res.w == 0.0) / m
            assert frac >= 0.2, f"{name}: only {frac:.0%} zeros"
            note.append(f"{name} {frac:.0%} zeros")
        X, y = dense(data)
        _, f_ista = ista_l1_logistic(X, y, lam, iters=1_000_000)
        rel = abs(owl.f - f_ista) / abs(f_ista)
        assert rel <= 1e-6, f"OWL-QN {owl.f} vs ISTA {f_ista}"
        note.append(f"ISTA gap {rel:.1e}")


def test_criterion_6_dual_invariants(capsys):
    with criterion(capsys, 6, "dual coordinate descent invariants", 10):
        rng = np.random.default_rng(606)
        for trial in range(50):
            n, m = int(rng.integers(5, 40)), int(rng.integers(2, 8))
            data = make_classification(n, m, noise=float(rng.uniform(0, 2)), seed=trial)
            kind = "L1SVM" if trial % 2 else "L2SVM"
            C = float(10 ** rng.uniform(-2, 1.5))
            # check_invariants asserts box feasibility per update and w consistency per epoch
            res = svc_dual(data, kind, C=C, tol=1e-4, max_epochs=200, seed=trial,
                           check_invariants=True)
            alpha = res.info["alpha"]
            assert alpha.min() >= 0.0 and (kind == "L2SVM" or alpha.max() <= C)
            duals = res.info["dual_trace"]
            assert all(b >= a - 1e-12 * max(1.0, abs(a)) for a, b in zip(duals, duals[1:])), \
                f"trial {trial}: dual objective decreased"
        for x, C in [(2.0, 1.0), (0.5, 1.0), (3.0, 0.05), (1.0, 1.0), (0.1, 1000.0)]:
            data = Dataset([SparseExample([0], [x])], np.array([1.0]), 1)
            alpha = svc_dual(data, "L1SVM", C=C, tol=1e-12).info["alpha"][0]
            assert abs(alpha - min(C, 1.0 / x ** 2)) <= 1e-10
        assert svm_dual_grid(4.0, 1.0) == 0.25


def _random_dataset(rng):
    n, m = int(rng.integers(0, 30)), int(rng.integers(1, 40))
    examples = []
    for _ in range(n):
        k = int(rng.integers(0, m + 1))
        idx = np.sort(rng.choice(m, size=k, replace=False))
        kind = rng.integers(3)
        if kind == 0:
            vals = rng.integers(-5, 6, size=k).astype(float)
        elif kind == 1:
            vals = rng.standard_normal(k) * 10.0 ** rng.integers(-8, 9)
        else:
            vals = rng.uniform(-1, 1, size=k)
        examples.append(SparseExample(idx, vals))
    labels = rng.choice([-1.0, 1.0, 2.5, 0.0], size=n)
    return Dataset(examples, labels, m)


def test_criterion_7_io_round_trip(capsys):
    with criterion(capsys, 7, "LIBSVM round trip and flag parsing", 10) as note:
        rng = np.random.default_rng(707)
        for _ in range(100):
            d = _random_dataset(rng)
            for base in (0, 1):
                first = io.StringIO()
                write_libsvm(d, first, index_base=base)
                back = read_libsvm(io.StringIO(first.getvalue()), index_base=base,
                                   num_features=d.num_features)
                second = io.StringIO()
                write_libsvm(back, second, index_base=base)
                assert first.getvalue() == second.getvalue()
                assert back == d
        feat, lab = str(data_path("multiclass20.feat")), str(data_path("multiclass20.label"))
        opts = build_parser().parse_args(
            ["train", "-method", "3", "-algtype", "0", "-reg", "0.25", "-nClasses", "20",
             "-maxIter", "1000", "-startwith1", "true", "-trainFeatureFile", feat,
             "-trainLabelFile", lab, "-testFeatureFile", feat, "-testLabelFile", lab])
        assert (opts.method, opts.algtype, opts.reg, opts.nClasses, opts.maxIter,
                opts.startwith1) == (3, 0, 0.25, 20, 1000, True)
    if os.path.exists(IJCNN1):
        d = read_libsvm(IJCNN1)
        assert (d.num_examples, d.num_features) == (35000, 22)
        note.append("ijcnn1 shape checked")
    else:
        with capsys.disabled():
            print("      criterion 7: ijcnn1 not available locally, optional check skipped")


def test_criterion_8_cli(capsys):
    with criterion(capsys, 8, "CLI train and bench", 30):
        sep4 = str(data_path("separable4.libsvm"))
        out = io.StringIO()
        code = main(["train", "-method", "2", "-trainFile", sep4, "-testFile", sep4], out=out)
        assert (code, out.getvalue()) == (0, "accuracy 1\n")
        out = io.StringIO()
        code = main(["bench", "-trainFile", str(data_path("binary200.libsvm"))], out=out)
        assert code == 0
        rows = [line.split("\t") for line in out.getvalue().splitlines()[1:]]
        assert {r[0] for r in rows} == {v[0] for v in BENCH_OBJECTIVES.values()}
        for objective, solver, *cells in rows:
            dual_row = objective.endswith("Dual")
            hessian_free = objective.startswith("L1-SVM") and solver == "tron"
            supported = (solver == "svcDual") == dual_row and not hessian_free
            assert (cells == ["*"] * 3) == (not supported), (objective, solver, cells)


def test_criterion_9_determinism(capsys):
    with criterion(capsys, 9, "seeded and batch paths are bit-identical", 30):
        data = make_classification(60, 6, seed=9)
        cfg = SolverConfig(alpha=0.05, tol=1e-6, max_eval=300)
        scfg = StochasticConfig(step_size=0.05, epochs=5, mini_batch_size=3, seed=42)

        def same(a, b):
            return (a.w.tobytes() == b.w.tobytes() and a.f == b.f and a.trace == b.trace
                    and a.evaluations == b.evaluations and a.terminated == b.terminated)

        for name, solver in BATCH_SOLVERS.items():
            reg = Regularizer.L1 if name == "lbfgsMinOwl" else Regularizer.L2
            loss = RegularizedLoss(data, 1.0, reg, LossKind.LOGISTIC)
            assert same(solver(loss, np.zeros(6), cfg), solver(loss, np.zeros(6), cfg)), name
        for name, solver in STOCHASTIC_SOLVERS.items():
            reg = Regularizer.L1 if "DualAveraging" in name else Regularizer.L2
            loss = RegularizedLoss(data, 1.0, reg, LossKind.LOGISTIC)
            assert same(solver(loss, np.zeros(6), scfg), solver(loss, np.zeros(6), scfg)), name
        for kind in ("L1SVM", "L2SVM"):
            assert same(svc_dual(data, kind, seed=3), svc_dual(data, kind, seed=3))
        weights = [train(ClassifierSpec(algtype="sgd", config=scfg, n_classes=2), data).weights
              for _ in range(2)]
        assert weights[0].tobytes() == weights[1].tobytes()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
