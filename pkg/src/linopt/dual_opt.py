"""Dual coordinate descent for linear SVMs.

Works natively in the C-convention::

    min_w  C * sum_i loss_i(w) + 0.5 * ||w||^2

with ``loss_i`` the hinge (``"L1SVM"``) or squared hinge (``"L2SVM"``).
Under the L2 lambda-convention used by the losses module this is the same
problem with ``C = 1 / lam``, and objective values differ by the factor
``lam`` (see :func:`to_lambda_objective`).
"""

from __future__ import annotations

import enum
import logging

import numpy as np

from .batch_opt import SolverResult, Termination
from .dataio import Dataset

logger = logging.getLogger(__name__)


class SVMKind(enum.Enum):
    L1SVM = "L1SVM"   # hinge loss
    L2SVM = "L2SVM"   # squared hinge loss


def _constants(kind: SVMKind, C: float):
    if kind is SVMKind.L1SVM:
        return 0.0, C
    return 1.0 / (2.0 * C), np.inf


def primal_objective(data: Dataset, w, kind: SVMKind, C: float) -> float:
    """``C * sum_i loss_i + 0.5 ||w||^2``."""
    margin = 1.0 - data.labels * (data.to_csr() @ w)
    xi = np.maximum(0.0, margin)
    if SVMKind(kind) is SVMKind.L2SVM:
        xi = xi * xi
    return float(C * xi.sum() + 0.5 * w @ w)


def dual_objective(alpha, w, kind: SVMKind, C: float) -> float:
    """``sum alpha - 0.5 ||w||^2 - 0.5 sum D_ii alpha_i^2`` (to be maximized)."""
    D, _ = _constants(SVMKind(kind), C)
    return float(alpha.sum() - 0.5 * w @ w - 0.5 * D * (alpha @ alpha))


def to_lambda_objective(c_objective: float, C: float) -> float:
    """Convert a C-convention objective to ``sum loss + lam/2 ||w||^2``, ``lam = 1/C``."""
    return c_objective / C


def svc_dual(data: Dataset, kind="L2SVM", C: float = 1.0, tol: float = 0.1,
             max_epochs: int = 1000, seed: int = 0,
             check_invariants: bool = False) -> SolverResult:
    """Train a linear SVM by coordinate ascent on the dual.

    Each epoch sweeps a seeded random permutation of the examples; it stops
    once the largest projected-gradient magnitude seen in an epoch drops
    below ``tol``. Examples with ``x_i . x_i == 0`` are skipped (their dual
    variable stays 0).

    The returned ``f`` is the primal objective in the C-convention.
    ``evaluations`` counts epochs. ``info`` carries ``alpha`` and the
    per-epoch dual objective in ``dual_trace``. With ``check_invariants``
    every update is checked for box feasibility and every epoch for
    ``w == sum_i alpha_i y_i x_i``.
    """
    kind = SVMKind(kind)
    if not C > 0:
        raise ValueError("C must be > 0")
    if int(max_epochs) < 1:
        raise ValueError("max_epochs must be >= 1")
    y = data.labels
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("svc_dual needs labels in {-1, +1}")
    n, m = data.num_examples, data.num_features
    D, U = _constants(kind, C)
    rows = [(ex.indices, ex.values) for ex in data.examples]
    sq_norms = np.array([float(v @ v) for _, v in rows])
    qdiag = sq_norms + D
    alpha = np.zeros(n)
    w = np.zeros(m)
    rng = np.random.default_rng(seed)
    trace, dual_trace = [], []
    status = Termination.BUDGET_EXHAUSTED
    X = data.to_csr() if check_invariants else None
    for epoch in range(1, int(max_epochs) + 1):
        pg_max = 0.0
        for i in rng.permutation(n).tolist():
            if sq_norms[i] == 0.0:
                continue
            idx, val = rows[i]
            yi = y[i]
            G = yi * float(w[idx] @ val) - 1.0 + D * alpha[i]
            ai = alpha[i]
            if ai == 0.0:
                pg = min(G, 0.0)
            elif ai == U:
                pg = max(G, 0.0)
            else:
                pg = G
            pg_max = max(pg_max, abs(pg))
            if pg != 0.0:
                new = min(max(ai - G / qdiag[i], 0.0), U)
                alpha[i] = new
                w[idx] += (new - ai) * yi * val
                if check_invariants:
                    assert 0.0 <= new <= U, f"alpha[{i}]={new} left [0, {U}]"
        if check_invariants:
            exact = X.T @ (alpha * y)
            scale = max(float(np.abs(exact).max(initial=0.0)), 1.0)
            err = float(np.abs(w - exact).max(initial=0.0)) / scale
            assert err <= 1e-8, f"incremental w drifted by {err:.3e}"
        trace.append((epoch, primal_objective(data, w, kind, C)))
        dual_trace.append(dual_objective(alpha, w, kind, C))
        if pg_max < tol:
            status = Termination.CONVERGED
            break
    logger.debug("svc_dual %s: %d epochs, max |PG| %.3e", status.value, epoch, pg_max)
    f = primal_objective(data, w, kind, C)
    return SolverResult(w, f, epoch, status, trace, pg_max,
                        {"alpha": alpha, "dual_trace": dual_trace, "qdiag": qdiag,
                         "C": C, "kind": kind})
