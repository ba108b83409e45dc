import numpy as np
import pytest

from linopt.batch_opt import (BATCH_SOLVERS, SolverConfig, Termination,
                              barzilai_borwein_step, gd, gd_barzilai_borwein,
                              gd_line_search, gd_nesterov, lbfgs_min, lbfgs_min_owl,
                              pseudo_gradient, tron, truncated_cg, two_loop_direction,
                              update_radius)
from linopt.losses import (LossKind, Quadratic, RegularizedLoss, Regularizer,
                           UnsupportedOperationError)
from linopt.synthetic import make_classification, make_regression

from oracles import dense, logistic_data_grad
from toys import l1_toy, logistic_toy

# frozen from tests/oracles.py: 10^6-iteration gd at step 0.5/L
LOGISTIC_TOY_OPT = 14.320163534490362
# frozen from tests/oracles.py: 10^6-iteration ISTA at lam = 0.5 * lam_max
L1_TOY_LAMBDA = 6.843672501111267
L1_TOY_OPT = 31.685300013846057

CURVATURE_BOUND = {
    LossKind.LEAST_SQUARES: 1.0, LossKind.LOGISTIC: 0.25, LossKind.PROBIT: 1.0,
    LossKind.SMOOTH_SVM: 2.0, LossKind.HUBER_SVM: 1.0, LossKind.SMOOTH_SVR: 2.0,
}


def half_square(lam=1.0):
    return Quadratic([[lam]])


@pytest.fixture(scope="module")
def logistic():
    return RegularizedLoss(logistic_toy(), 1.0, Regularizer.L2, LossKind.LOGISTIC)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(memory=0)
    with pytest.raises(ValueError):
        SolverConfig(gamma=1.0)
    with pytest.raises(ValueError):
        SolverConfig(alpha=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_eval=0)
    with pytest.raises(ValueError):
        SolverConfig(tol=-1.0)


# gd

def test_gd_half_square_contraction():
    res = gd(half_square(), [1.0], SolverConfig(alpha=0.5, tol=1e-3, max_eval=100))
    assert res.converged
    assert res.evaluations <= 12
    xs = [np.sqrt(2 * f) for _, f in res.trace]
    np.testing.assert_allclose(xs[:4], [1.0, 0.5, 0.25, 0.125])
    assert res.w[0] == 0.5 ** (res.evaluations - 1)


def test_gd_immediate_convergence():
    res = gd(half_square(), [1e-5], SolverConfig(tol=1e-3))
    assert res.converged and res.evaluations == 1
    assert res.w[0] == 1e-5


def test_gd_logistic_toy(logistic):
    res = gd(logistic, np.zeros(5), SolverConfig(alpha=0.1, tol=1e-4, max_eval=100000))
    assert res.converged and res.grad_norm < 1e-4
    assert abs(res.f - LOGISTIC_TOY_OPT) <= 1e-6


def test_gd_divergence_is_reported(logistic):
    res = gd(logistic, np.zeros(5), SolverConfig(alpha=5.0, tol=1e-4, max_eval=50))
    assert res.terminated is Termination.BUDGET_EXHAUSTED
    assert res.trace[-1][1] > res.trace[0][1]


# line search

def test_line_search_exact_first_probe():
    res = gd_line_search(half_square(), [1.0], SolverConfig(alpha=1.0, tol=1e-8))
    assert res.converged and res.evaluations <= 3
    assert res.w[0] == 0.0


@pytest.mark.parametrize("kind", list(CURVATURE_BOUND) + [LossKind.HINGE_SVM])
@pytest.mark.parametrize("solver", [gd_line_search, gd_barzilai_borwein, lbfgs_min])
def test_line_search_traces_monotone(kind, solver):
    d = make_classification(30, 4, seed=4) if kind.is_classification else make_regression(30, 4)
    loss = RegularizedLoss(d, 0.5, Regularizer.L2, kind)
    res = solver(loss, np.zeros(4), SolverConfig(tol=1e-8, max_eval=300))
    fs = [f for _, f in res.trace]
    assert all(b <= a for a, b in zip(fs, fs[1:]))


def test_line_search_hinge_terminates():
    loss = RegularizedLoss(logistic_toy(), 1.0, Regularizer.L2, LossKind.HINGE_SVM)
    res = gd_line_search(loss, np.zeros(5), SolverConfig(tol=1e-6, max_eval=500))
    assert res.terminated in (Termination.CONVERGED, Termination.BUDGET_EXHAUSTED)
    assert res.evaluations <= 500


def test_line_search_failure_is_reported():
    class Wrong(Quadratic):
        def eval(self, w):
            f, g = super().eval(w)
            return f, -g   # ascent direction: no step is ever accepted

    res = gd_line_search(Wrong([[1.0]]), [1.0], SolverConfig(tol=1e-8, max_eval=1000))
    assert res.terminated is Termination.LINE_SEARCH_FAILED
    assert res.w[0] == 1.0


# Barzilai-Borwein

def test_bb_recovers_inverse_curvature():
    lam = 4.0
    q = half_square(lam)
    cfg = SolverConfig(alpha=0.1, tol=1e-12, max_eval=50)
    res = gd_barzilai_borwein(q, [1.0], cfg)
    x1 = 1.0 - 0.1 * lam * 1.0
    assert barzilai_borwein_step(np.array([x1 - 1.0]), np.array([lam * (x1 - 1.0)]), 0.1) == 1 / lam
    assert res.w[0] == 0.0
    assert res.evaluations == 3


def test_bb_step_fallback_and_clamp():
    assert barzilai_borwein_step(np.array([1.0]), np.array([-1.0]), 0.3) == 0.3
    assert barzilai_borwein_step(np.array([1.0]), np.array([1e-20]), 0.3) == 1e10


def test_bb_immediate_convergence():
    res = gd_barzilai_borwein(half_square(), [0.0], SolverConfig())
    assert res.converged and res.evaluations == 1


def test_bb_logistic_faster_than_gd(logistic):
    cfg = SolverConfig(alpha=0.1, tol=1e-4, max_eval=100000)
    plain = gd(logistic, np.zeros(5), cfg)
    bb = gd_barzilai_borwein(logistic, np.zeros(5), cfg)
    assert abs(bb.f - LOGISTIC_TOY_OPT) <= 1e-6
    assert bb.evaluations < plain.evaluations


# Nesterov

def test_nesterov_first_step_matches_line_search(logistic):
    cfg = SolverConfig(alpha=1.0, tol=1e-8, max_eval=1000)
    a = gd_nesterov(logistic, np.zeros(5), cfg)
    b = gd_line_search(logistic, np.zeros(5), cfg)
    assert a.trace[:2] == b.trace[:2]


def test_nesterov_half_square():
    res = gd_nesterov(half_square(), [1.0], SolverConfig(alpha=0.3, tol=1e-6, max_eval=1000))
    assert res.converged and res.grad_norm < 1e-6


def test_nesterov_beats_gd_at_fixed_budget(logistic):
    # small step so that neither run reaches float-level convergence
    cfg = SolverConfig(alpha=0.01, tol=1e-12, max_eval=200)
    assert gd_nesterov(logistic, np.zeros(5), cfg).f <= gd(logistic, np.zeros(5), cfg).f


# L-BFGS

def test_two_loop_without_history_is_steepest_descent():
    g = np.array([1.0, -2.0])
    np.testing.assert_array_equal(two_loop_direction(g, [], []), -g)


def test_two_loop_single_pair_is_exact_in_1d():
    s, y = np.array([2.0]), np.array([6.0])      # curvature 3
    np.testing.assert_allclose(two_loop_direction(np.array([3.0]), [s], [y]), [-1.0])


def test_two_loop_secant_condition():
    # H y_k = s_k holds for the most recent pair
    rng = np.random.default_rng(0)
    A = np.diag([1.0, 2.0, 5.0])
    S = [rng.standard_normal(3) for _ in range(3)]
    Y = [A @ s for s in S]
    np.testing.assert_allclose(-two_loop_direction(Y[-1], S, Y), S[-1], rtol=1e-10)


@pytest.mark.parametrize("curv", [1.0, 4.0, 0.01])
def test_lbfgs_1d_quadratic(curv):
    res = lbfgs_min(half_square(curv), [1.0], SolverConfig(tol=1e-10, max_eval=100))
    assert res.converged
    assert len(res.trace) - 1 <= 3
    assert abs(res.w[0]) < 1e-10


def test_lbfgs_logistic_toy(logistic):
    X, _ = dense(logistic_toy())
    step = 0.5 / (0.25 * np.linalg.norm(X, 2) ** 2 + 1.0)   # the oracle's step
    res = lbfgs_min(logistic, np.zeros(5), SolverConfig(tol=1e-6, max_eval=10000))
    plain = gd(logistic, np.zeros(5), SolverConfig(alpha=step, tol=1e-6, max_eval=100000))
    assert abs(res.f - LOGISTIC_TOY_OPT) <= 1e-8
    assert res.evaluations * 5 <= plain.evaluations


# OWL-QN

def test_pseudo_gradient_cases():
    w = np.array([0.0, 0.0, 0.0, 2.0, -1.0])
    g = np.array([0.3, -0.8, 0.9, 0.1, 0.1])
    np.testing.assert_allclose(pseudo_gradient(w, g, 0.5), [0.0, -0.3, 0.4, 0.6, -0.4])


def test_owlqn_requires_split_objective():
    with pytest.raises(UnsupportedOperationError):
        lbfgs_min_owl(half_square(), [1.0], SolverConfig())


def test_owlqn_with_zero_lambda_is_lbfgs():
    d = l1_toy()
    l1 = RegularizedLoss(d, 0.0, Regularizer.L1, LossKind.LOGISTIC)
    cfg = SolverConfig(tol=1e-6, max_eval=500)
    a = lbfgs_min_owl(l1, np.zeros(10), cfg)
    b = lbfgs_min(l1, np.zeros(10), cfg)
    np.testing.assert_array_equal(a.w, b.w)
    assert a.trace == b.trace


@pytest.fixture(scope="module")
def owl_result():
    loss = RegularizedLoss(l1_toy(), L1_TOY_LAMBDA, Regularizer.L1, LossKind.LOGISTIC)
    return loss, lbfgs_min_owl(loss, np.zeros(10), SolverConfig(tol=1e-6, max_eval=5000))


def test_owlqn_lambda_max_matches_oracle():
    X, y = dense(l1_toy())
    loss = RegularizedLoss(l1_toy(), 0.0, Regularizer.L1, LossKind.LOGISTIC)
    lam_max = np.abs(loss.data_eval(np.zeros(10))[1]).max()
    assert 0.5 * lam_max == pytest.approx(L1_TOY_LAMBDA, rel=1e-14)
    assert lam_max == pytest.approx(np.abs(logistic_data_grad(X, y, np.zeros(10))).max())


def test_owlqn_sparse_and_matches_ista(owl_result):
    loss, res = owl_result
    assert res.converged
    assert np.count_nonzero(res.w == 0.0) >= 1
    assert abs(res.f - L1_TOY_OPT) <= 1e-6


def test_owlqn_zero_pattern(owl_result):
    loss, res = owl_result
    _, g = loss.data_eval(res.w)
    inactive = np.abs(g) < 0.9 * loss.lam
    assert inactive.any()
    assert np.all(res.w[inactive] == 0.0)


# TRON

def test_update_radius():
    assert update_radius(1.0, 1.0, 1.0) > 1.0
    assert update_radius(1.0, 0.5, 1.0) == 1.0
    assert update_radius(1.0, 0.1, 1.0) == 0.5
    assert update_radius(1.0, -1.0, 0.2) == 0.25 * 0.2


def test_truncated_cg_respects_radius():
    A = np.diag([1.0, 10.0])
    g = np.array([5.0, 5.0])
    s, r = truncated_cg(lambda v: A @ v, g, delta=0.5)
    assert np.linalg.norm(s) == pytest.approx(0.5)
    np.testing.assert_allclose(r, -g - A @ s)
    s, _ = truncated_cg(lambda v: A @ v, g, delta=100.0, cg_tol=1e-12)
    np.testing.assert_allclose(s, -np.linalg.solve(A, g))


def test_tron_newton_exact_on_quadratic():
    q = Quadratic(np.eye(3))
    res = tron(q, [1.0, -2.0, 0.5], SolverConfig(tol=1e-10))
    assert res.converged
    assert res.evaluations == 2
    np.testing.assert_allclose(res.w, 0.0, atol=1e-15)


def test_tron_rejects_functions_without_hessian():
    calls = []

    class Counting(RegularizedLoss):
        def eval(self, w):
            calls.append(1)
            return super().eval(w)

    loss = Counting(logistic_toy(), 1.0, Regularizer.L2, LossKind.PROBIT)
    with pytest.raises(UnsupportedOperationError):
        tron(loss, np.zeros(5), SolverConfig())
    assert not calls


def test_tron_agrees_with_lbfgs(logistic):
    ref = lbfgs_min(logistic, np.zeros(5), SolverConfig(tol=1e-8, max_eval=1000))
    res = tron(logistic, np.zeros(5), SolverConfig(tol=0.01))
    assert res.converged
    assert res.f == pytest.approx(ref.f, rel=1e-6)


# cross-cutting invariants

@pytest.mark.parametrize("name", sorted(BATCH_SOLVERS))
@pytest.mark.parametrize("budget", [1, 2, 3, 5, 8, 13])
def test_budget_honesty(name, budget):
    kind = LossKind.LOGISTIC
    reg = Regularizer.L1 if name == "lbfgsMinOwl" else Regularizer.L2
    loss = RegularizedLoss(logistic_toy(), 1.0, reg, kind)
    res = BATCH_SOLVERS[name](loss, np.zeros(5), SolverConfig(tol=1e-12, max_eval=budget))
    assert res.evaluations <= budget
    assert res.terminated is Termination.BUDGET_EXHAUSTED


@pytest.mark.parametrize("name", sorted(BATCH_SOLVERS))
def test_determinism(name):
    reg = Regularizer.L1 if name == "lbfgsMinOwl" else Regularizer.L2
    loss = RegularizedLoss(logistic_toy(), 1.0, reg, LossKind.LOGISTIC)
    cfg = SolverConfig(alpha=0.05, tol=1e-6, max_eval=400)
    a = BATCH_SOLVERS[name](loss, np.zeros(5), cfg)
    b = BATCH_SOLVERS[name](loss, np.zeros(5), cfg)
    assert a.w.tobytes() == b.w.tobytes()
    assert (a.f, a.evaluations, a.terminated, a.trace) == (b.f, b.evaluations, b.terminated, b.trace)


@pytest.mark.parametrize("kind", list(CURVATURE_BOUND))
def test_batch_solvers_agree(kind):
    d = make_classification(40, 4, seed=8) if kind.is_classification else make_regression(40, 4)
    loss = RegularizedLoss(d, 1.0, Regularizer.L2, kind)
    X, _ = dense(d)
    step = 1.0 / (CURVATURE_BOUND[kind] * np.linalg.norm(X, 2) ** 2 + 1.0)
    cfg = SolverConfig(alpha=step, tol=1e-6, max_eval=200000)
    fs = {}
    for name, solver in BATCH_SOLVERS.items():
        if name == "lbfgsMinOwl" or (name == "tron" and not loss.supports_hessian):
            continue
        res = solver(loss, np.zeros(4), cfg)
        assert res.converged, name
        fs[name] = res.f
    best = min(fs.values())
    assert all(abs(f - best) <= 1e-4 * abs(best) for f in fs.values()), fs
