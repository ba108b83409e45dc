"""Batch solvers over any :class:`~linopt.losses.DifferentiableFunction`.

All solvers count *function evaluations* (one ``eval`` call = one
evaluation, including rejected line-search trials) and never exceed
``SolverConfig.max_eval``. Convergence is ``||g||_2 < tol`` on the gradient
(or, for OWL-QN, the pseudo-gradient). Hessian-vector products used by
``tron`` are not counted as evaluations.
"""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .linalg import DimensionMismatchError, multiply_accumulate, norm
from .losses import DifferentiableFunction, UnsupportedOperationError

logger = logging.getLogger(__name__)

MIN_STEP = 1e-20
BB_STEP_BOUNDS = (1e-10, 1e10)
CURVATURE_EPS = 1e-10


class Termination(enum.Enum):
    CONVERGED = "Converged"
    BUDGET_EXHAUSTED = "BudgetExhausted"
    LINE_SEARCH_FAILED = "LineSearchFailed"


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters shared by the batch solvers.

    alpha : initial (or constant, for ``gd``) step size
    gamma : Armijo sufficient-decrease constant
    max_eval : function-evaluation budget
    tol : gradient-norm tolerance
    memory : number of curvature pairs kept by L-BFGS / OWL-QN
    """

    alpha: float = 1.0
    gamma: float = 1e-4
    max_eval: int = 250
    tol: float = 1e-3
    memory: int = 100
    verbosity: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if int(self.max_eval) < 1:
            raise ValueError("max_eval must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if int(self.memory) < 1:
            raise ValueError("memory must be >= 1")


@dataclass
class SolverResult:
    w: np.ndarray
    f: float
    evaluations: int
    terminated: Termination
    trace: List[Tuple[int, float]] = field(default_factory=list)
    grad_norm: float = float("nan")
    info: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.terminated is Termination.CONVERGED


class _Evaluator:
    """Budgeted wrapper around an ``x -> (f, g)`` callable."""

    def __init__(self, fn: Callable, max_eval: int):
        self.fn = fn
        self.max_eval = int(max_eval)
        self.count = 0
        self.trace: List[Tuple[int, float]] = []

    @property
    def exhausted(self) -> bool:
        return self.count >= self.max_eval

    def __call__(self, x):
        self.count += 1
        f, g = self.fn(x)
        return float(f), np.asarray(g, dtype=np.float64)

    def record(self, f):
        self.trace.append((self.count, float(f)))


def _start(c: DifferentiableFunction, x0, cfg: SolverConfig):
    x = np.array(x0, dtype=np.float64)
    if x.shape != (c.dimension,):
        raise DimensionMismatchError(
            f"x0 has shape {x.shape}, function dimension is {c.dimension}")
    return x, _Evaluator(c.eval, cfg.max_eval)


def _finish(x, f, gnorm, ev, cfg, status=None, **info):
    if status is None:
        status = Termination.CONVERGED if gnorm < cfg.tol else Termination.BUDGET_EXHAUSTED
    if cfg.verbosity:
        logger.info("%s after %d evaluations: f=%.10g |g|=%.3e",
                    status.value, ev.count, f, gnorm)
    return SolverResult(x, f, ev.count, status, ev.trace, gnorm, info)


def _armijo(ev: _Evaluator, x, f, d, slope, t0, gamma, project=None, pg=None):
    """Backtrack ``t = t0, t0/2, ...`` until sufficient decrease.

    Returns ``(x_new, f_new, g_new, t)`` or a :class:`Termination` on
    failure. With ``project`` set (OWL-QN), trial points are projected and
    the decrease is measured against ``pg . (x_new - x)``.
    """
    t = t0
    while True:
        if ev.exhausted:
            return Termination.BUDGET_EXHAUSTED
        xn = x + t * d
        if project is not None:
            xn = project(xn)
        fn, gn = ev(xn)
        bound = gamma * (pg @ (xn - x)) if project is not None else gamma * t * slope
        # a bound below one ulp of f would accept a step that changes nothing
        if fn <= f + bound and (fn < f or bound >= 0):
            return xn, fn, gn, t
        t *= 0.5
        if t < MIN_STEP:
            return Termination.LINE_SEARCH_FAILED


def gd(c: DifferentiableFunction, x0, cfg: SolverConfig) -> SolverResult:
    """Gradient descent with a constant step ``cfg.alpha``."""
    x, ev = _start(c, x0, cfg)
    f, g = ev(x)
    ev.record(f)
    gnorm = norm(g)
    while gnorm >= cfg.tol and ev.count < cfg.max_eval:
        x = multiply_accumulate(x, cfg.alpha, g)
        f, g = ev(x)
        ev.record(f)
        gnorm = norm(g)
        if cfg.verbosity > 1:
            logger.info("gd eval %d f=%.10g |g|=%.3e", ev.count, f, gnorm)
    return _finish(x, f, gnorm, ev, cfg)


def _descent_loop(c, x0, cfg, seed_step):
    """Shared loop for steepest descent with Armijo backtracking.

    ``seed_step(x, g, x_prev, g_prev)`` supplies the first trial step.
    """
    x, ev = _start(c, x0, cfg)
    f, g = ev(x)
    ev.record(f)
    gnorm = norm(g)
    x_prev = g_prev = None
    while gnorm >= cfg.tol and not ev.exhausted:
        t0 = seed_step(x, g, x_prev, g_prev)
        res = _armijo(ev, x, f, -g, -gnorm * gnorm, t0, cfg.gamma)
        if isinstance(res, Termination):
            return _finish(x, f, gnorm, ev, cfg, res)
        x_prev, g_prev = x, g
        x, f, g, _ = res
        ev.record(f)
        gnorm = norm(g)
    return _finish(x, f, gnorm, ev, cfg)


def gd_line_search(c: DifferentiableFunction, x0, cfg: SolverConfig) -> SolverResult:
    """Steepest descent; each step backtracks (halving) from ``cfg.alpha``."""
    return _descent_loop(c, x0, cfg, lambda x, g, xp, gp: cfg.alpha)


def barzilai_borwein_step(s, y, fallback: float) -> float:
    """``s.s / s.y`` clamped to the allowed range; ``fallback`` if ``s.y <= 0``."""
    sy = float(s @ y)
    if not sy > 0:
        return fallback
    lo, hi = BB_STEP_BOUNDS
    return min(max(float(s @ s) / sy, lo), hi)


def gd_barzilai_borwein(c: DifferentiableFunction, x0, cfg: SolverConfig) -> SolverResult:
    def seed(x, g, xp, gp):
        if xp is None:
            return cfg.alpha
        return barzilai_borwein_step(x - xp, g - gp, cfg.alpha)

    return _descent_loop(c, x0, cfg, seed)


def gd_nesterov(c: DifferentiableFunction, x0, cfg: SolverConfig) -> SolverResult:
    """Accelerated gradient with momentum ``(k-1)/(k+2)``.

    The gradient step from the extrapolated point backtracks from
    ``cfg.alpha``. Once momentum is nonzero the sufficient-decrease
    constant is ``max(cfg.gamma, 0.5)``: acceleration is only stable for
    steps satisfying the quadratic upper bound, which a tiny Armijo constant
    does not enforce. The first step (zero momentum) is exactly a
    ``gd_line_search`` step. The objective trace need not be monotone.
    """
    x, ev = _start(c, x0, cfg)
    f, g = ev(x)
    ev.record(f)
    gnorm = norm(g)
    x_prev = x
    k = 1
    while gnorm >= cfg.tol and not ev.exhausted:
        beta = (k - 1) / (k + 2)
        if beta == 0.0:
            y, fy, gy = x, f, g
            decrease = cfg.gamma
        else:
            y = x + beta * (x - x_prev)
            fy, gy = ev(y)
            decrease = max(cfg.gamma, 0.5)
        gy_norm = norm(gy)
        res = _armijo(ev, y, fy, -gy, -gy_norm * gy_norm, cfg.alpha, decrease)
        if isinstance(res, Termination):
            return _finish(x, f, gnorm, ev, cfg, res)
        x_prev = x
        x, f, g, _ = res
        ev.record(f)
        gnorm = norm(g)
        k += 1
    return _finish(x, f, gnorm, ev, cfg)


def two_loop_direction(g, s_hist, y_hist) -> np.ndarray:
    """Return ``-H g`` for the L-BFGS inverse-Hessian approximation ``H``.

    ``s_hist``/``y_hist`` are ordered oldest first. With no history the
    result is ``-g``.
    """
    q = np.array(g, dtype=np.float64)
    if not s_hist:
        return -q
    rhos = [1.0 / float(y @ s) for s, y in zip(s_hist, y_hist)]
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rhos)):
        a = rho * float(s @ q)
        q -= a * y
        alphas.append(a)
    s, y = s_hist[-1], y_hist[-1]
    q *= float(s @ y) / float(y @ y)
    for s, y, rho, a in zip(s_hist, y_hist, rhos, reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def lbfgs_min(c: DifferentiableFunction, x0, cfg: SolverConfig) -> SolverResult:
    """Limited-memory BFGS with Armijo backtracking.

    Trial steps start at 1.0 once curvature information exists and at
    ``cfg.alpha`` for steepest-descent steps (first iteration, or after a
    history reset).
    """
    x, ev = _start(c, x0, cfg)
    f, g = ev(x)
    ev.record(f)
    gnorm = norm(g)
    s_hist, y_hist = deque(maxlen=cfg.memory), deque(maxlen=cfg.memory)
    while gnorm >= cfg.tol and not ev.exhausted:
        d = two_loop_direction(g, s_hist, y_hist)
        slope = float(g @ d)
        if not slope < 0:
            s_hist.clear()
            y_hist.clear()
            d, slope = -g, -gnorm * gnorm
        t0 = 1.0 if s_hist else cfg.alpha
        res = _armijo(ev, x, f, d, slope, t0, cfg.gamma)
        if isinstance(res, Termination):
            return _finish(x, f, gnorm, ev, cfg, res)
        xn, fn, gn, _ = res
        s, y = xn - x, gn - g
        if float(s @ y) > CURVATURE_EPS:
            s_hist.append(s)
            y_hist.append(y)
        x, f, g = xn, fn, gn
        ev.record(f)
        gnorm = norm(g)
        if cfg.verbosity > 1:
            logger.info("lbfgs eval %d f=%.10g |g|=%.3e", ev.count, f, gnorm)
    return _finish(x, f, gnorm, ev, cfg)


def pseudo_gradient(w, g, lam) -> np.ndarray:
    """Minimum-norm subgradient of ``smooth(w) + lam * ||w||_1``.

    ``g`` is the gradient of the smooth part only.
    """
    w = np.asarray(w, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    pg = g + lam * np.sign(w)
    at_zero = w == 0
    right, left = g + lam, g - lam
    pg[at_zero] = np.where(right[at_zero] < 0, right[at_zero],
                           np.where(left[at_zero] > 0, left[at_zero], 0.0))
    return pg


def lbfgs_min_owl(c, x0, cfg: SolverConfig) -> SolverResult:
    """OWL-QN for ``smooth(w) + lam * ||w||_1``.

    ``c`` must expose ``smooth_eval(w) -> (f, g)`` and ``l1_strength``
    (every :class:`~linopt.losses.RegularizedLoss` does). Iterates are kept
    in the orthant chosen at each step, so the result can hold exact zeros.
    With ``l1_strength == 0`` this reduces to :func:`lbfgs_min`.
    """
    if not (hasattr(c, "smooth_eval") and hasattr(c, "l1_strength")):
        raise UnsupportedOperationError(
            "OWL-QN needs a function exposing smooth_eval and l1_strength")
    lam = float(c.l1_strength)
    x = np.array(x0, dtype=np.float64)
    if x.shape != (c.dimension,):
        raise DimensionMismatchError(
            f"x0 has shape {x.shape}, function dimension is {c.dimension}")

    def full_eval(w):
        fs, gs = c.smooth_eval(w)
        return fs + lam * float(np.abs(w).sum()), gs

    ev = _Evaluator(full_eval, cfg.max_eval)
    f, g = ev(x)
    ev.record(f)
    pg = pseudo_gradient(x, g, lam)
    pgnorm = norm(pg)
    s_hist, y_hist = deque(maxlen=cfg.memory), deque(maxlen=cfg.memory)
    while pgnorm >= cfg.tol and not ev.exhausted:
        d = two_loop_direction(pg, s_hist, y_hist)
        if lam > 0:
            d[d * pg > 0] = 0.0
        slope = float(pg @ d)
        if not slope < 0:
            s_hist.clear()
            y_hist.clear()
            d, slope = -pg, -pgnorm * pgnorm
        project = None
        if lam > 0:
            orthant = np.sign(x)
            orthant[x == 0] = -np.sign(pg[x == 0])

            def project(z, orthant=orthant):
                z = z.copy()
                z[np.sign(z) != orthant] = 0.0
                return z

        t0 = 1.0 if s_hist else cfg.alpha
        res = _armijo(ev, x, f, d, slope, t0, cfg.gamma, project=project, pg=pg)
        if isinstance(res, Termination):
            return _finish(x, f, pgnorm, ev, cfg, res)
        xn, fn, gn, _ = res
        s, y = xn - x, gn - g
        if float(s @ y) > CURVATURE_EPS:
            s_hist.append(s)
            y_hist.append(y)
        x, f, g = xn, fn, gn
        ev.record(f)
        pg = pseudo_gradient(x, g, lam)
        pgnorm = norm(pg)
    return _finish(x, f, pgnorm, ev, cfg)


@dataclass(frozen=True)
class TrustRegionParams:
    eta0: float = 1e-4
    eta1: float = 0.25
    eta2: float = 0.75
    sigma1: float = 0.25
    sigma2: float = 0.5
    sigma3: float = 4.0
    cg_tol: float = 0.1


def update_radius(delta, rho, step_norm, p: TrustRegionParams = TrustRegionParams()):
    """New trust-region radius after a step with reduction ratio ``rho``."""
    if rho < p.eta0:
        return p.sigma1 * min(delta, step_norm)
    if rho < p.eta1:
        return p.sigma2 * delta
    if rho > p.eta2:
        return p.sigma3 * delta
    return delta


def _boundary_tau(s, d, delta):
    # positive root of ||s + tau d|| = delta
    sd, dd, ss = float(s @ d), float(d @ d), float(s @ s)
    rad = np.sqrt(max(sd * sd + dd * (delta * delta - ss), 0.0))
    return (rad - sd) / dd if sd < 0 else (delta * delta - ss) / (sd + rad)


def truncated_cg(hessp, g, delta, cg_tol=0.1, max_iter=None):
    """Approximately minimize ``g.s + 0.5 s.H.s`` subject to ``||s|| <= delta``.

    Returns the step ``s`` and the residual ``r = -g - H s``.
    """
    m = g.shape[0]
    max_iter = m + 10 if max_iter is None else max_iter
    s = np.zeros(m)
    r = -g.copy()
    d = r.copy()
    rtr = float(r @ r)
    stop = cg_tol * norm(g)
    for _ in range(max_iter):
        if np.sqrt(rtr) <= stop:
            break
        Hd = hessp(d)
        dHd = float(d @ Hd)
        if dHd <= 0:
            tau = _boundary_tau(s, d, delta)
            s += tau * d
            r -= tau * Hd
            break
        a = rtr / dHd
        s_new = s + a * d
        if norm(s_new) > delta:
            tau = _boundary_tau(s, d, delta)
            s += tau * d
            r -= tau * Hd
            break
        s = s_new
        r -= a * Hd
        rtr_new = float(r @ r)
        d = r + (rtr_new / rtr) * d
        rtr = rtr_new
    return s, r


def tron(c: DifferentiableFunction, x0, cfg: SolverConfig,
         params: TrustRegionParams = TrustRegionParams()) -> SolverResult:
    """Trust-region Newton with truncated conjugate-gradient inner solves.

    The initial radius is ``||g(x0)||``.
    """
    if not c.supports_hessian:
        raise UnsupportedOperationError(
            f"tron needs Hessian-vector products; {c!r} has none")
    x, ev = _start(c, x0, cfg)
    f, g = ev(x)
    ev.record(f)
    gnorm = norm(g)
    delta = gnorm
    while gnorm >= cfg.tol and not ev.exhausted:
        s, r = truncated_cg(lambda v: c.hessp(x, v), g, delta, params.cg_tol)
        xn = x + s
        fn, gn = ev(xn)
        gs = float(g @ s)
        prered = -0.5 * (gs - float(s @ r))
        actred = f - fn
        rho = actred / prered if prered > 0 else (1.0 if actred == 0 else -np.inf)
        delta = update_radius(delta, rho, norm(s), params)
        if rho > params.eta0:
            x, f, g = xn, fn, gn
            ev.record(f)
            gnorm = norm(g)
        if cfg.verbosity > 1:
            logger.info("tron eval %d f=%.10g |g|=%.3e delta=%.3e rho=%.3f",
                        ev.count, f, gnorm, delta, rho)
        if delta < MIN_STEP:
            return _finish(x, f, gnorm, ev, cfg, Termination.LINE_SEARCH_FAILED)
    return _finish(x, f, gnorm, ev, cfg)


BATCH_SOLVERS = {
    "gd": gd,
    "gdLineSearch": gd_line_search,
    "gdBarzilaiBorwein": gd_barzilai_borwein,
    "gdNesterov": gd_nesterov,
    "lbfgsMin": lbfgs_min,
    "lbfgsMinOwl": lbfgs_min_owl,
    "tron": tron,
}
