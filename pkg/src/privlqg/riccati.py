"""Covariance operators and steady-state filter/controller quantities.

    h(X)  = A X A' + Q                           (prediction)
    g~(X) = X - X C' (C X C' + R)^{-1} C X       (measurement update)
    g(X)  = g~(h(X))

Fixed points are found by plain iteration; at the problem sizes of interest
this is cheap and keeps every step a symmetrized PSD map.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NonConvergence

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


def _sym(X):
    return (X + X.T) / 2


def spd_solve(M, rhs):
    """Solve M Z = rhs for symmetric positive definite M via Cholesky."""
    return cho_solve(cho_factor(_sym(M)), rhs)


def lyapunov_step(X, model):
    return _sym(model.A @ X @ model.A.T + model.Q)


def measurement_update(X, model):
    C = model.C
    XCt = X @ C.T
    return _sym(X - XCt @ spd_solve(C @ XCt + model.R, XCt.T))


def riccati_step(X, model):
    return measurement_update(lyapunov_step(X, model), model)


def lyapunov_power(X, model, times):
    """h applied ``times`` times (h^0 is the identity)."""
    for _ in range(times):
        X = lyapunov_step(X, model)
    return X


class FixedPoint(NamedTuple):
    X: np.ndarray
    iters: int
    residual: float


def fixed_point(f, X0, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Iterate X <- f(X) until ||f(X) - X||_F <= tol * (1 + ||X||_F).

    Returns the iterate X that satisfies the criterion (not f(X)), the number
    of map evaluations, and the relative-scale residual ||f(X) - X||_F.
    Raises :class:`NonConvergence` when the budget runs out or the iterates
    stop being finite.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    X = np.array(X0, dtype=float)
    residual = np.inf
    for it in range(1, max_iter + 1):
        Y = f(X)
        if not np.all(np.isfinite(Y)):
            raise NonConvergence(residual, it)
        residual = float(np.linalg.norm(Y - X))
        if not np.isfinite(residual):
            raise NonConvergence(residual, it)
        if residual <= tol * (1.0 + np.linalg.norm(X)):
            return FixedPoint(X, it, residual)
        X = Y
    raise NonConvergence(residual, max_iter)


def kalman_gain(P_prior, model):
    """K = P- C' (C P- C' + R)^{-1}."""
    C = model.C
    PCt = P_prior @ C.T
    return spd_solve(C @ PCt + model.R, PCt.T).T


def steady_filter(model, X0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Steady a-posteriori covariance P_bar = g(P_bar) and the matching gain K.

    Returns ``(P_bar, K, fp)`` where ``fp`` is the :class:`FixedPoint` record.
    """
    X0 = model.Q if X0 is None else X0
    fp = fixed_point(lambda X: riccati_step(X, model), X0, tol, max_iter)
    P_bar = fp.X
    K = kalman_gain(lyapunov_step(P_bar, model), model)
    return P_bar, K, fp


def control_terms(S, model):
    """(L, Phi) for a given cost-to-go matrix S."""
    A, B = model.A, model.B
    BtSA = B.T @ S @ A
    L = -spd_solve(B.T @ S @ B + model.U, BtSA)
    Phi = _sym(-BtSA.T @ L)
    return L, Phi


def control_step(S, model):
    """One backward Riccati step S <- A'SA + W - Phi(S)."""
    _, Phi = control_terms(S, model)
    return _sym(model.A.T @ S @ model.A + model.W - Phi)


def steady_controller(model, S0=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Steady control Riccati solution S, feedback L and Phi.

    Returns ``(S, L, Phi, fp)``.
    """
    S0 = model.W if S0 is None else S0
    fp = fixed_point(lambda S: control_step(S, model), S0, tol, max_iter)
    L, Phi = control_terms(fp.X, model)
    return fp.X, L, Phi, fp


@dataclass(frozen=True)
class SteadyState:
    P_bar: np.ndarray
    K: np.ndarray
    S: np.ndarray
    L: np.ndarray
    Phi: np.ndarray
    J_star: float
    filter_residual: float = 0.0
    control_residual: float = 0.0


def baseline_cost(model, steady):
    """J* = tr(S Q) + tr(Phi P_bar), the full-transmission average cost."""
    return float(np.trace(steady.S @ model.Q) + np.trace(steady.Phi @ steady.P_bar))


def solve_steady_state(model, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    P_bar, K, ffp = steady_filter(model, tol=tol, max_iter=max_iter)
    S, L, Phi, cfp = steady_controller(model, tol=tol, max_iter=max_iter)
    J = float(np.trace(S @ model.Q) + np.trace(Phi @ P_bar))
    return SteadyState(P_bar, K, S, L, Phi, J, ffp.residual, cfp.residual)
