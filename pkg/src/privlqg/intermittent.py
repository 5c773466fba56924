"""Periodic transmission: the server only receives y_k at k = lT + 1.

Between transmissions the server's posterior covariance grows by h; at a
transmission it is reset by the measurement update. In steady state the
posterior covariance therefore cycles through

    P~, h(P~), ..., h^{T-1}(P~)

where P~ is the unique PSD solution of P~ = g(h^{T-1}(P~)).
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from .errors import DetectabilityViolation
from .model import is_detectable
from .riccati import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    fixed_point,
    lyapunov_power,
    lyapunov_step,
    measurement_update,
    riccati_step,
    solve_steady_state,
)


@dataclass(frozen=True)
class PeriodicScheme:
    T: int

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 1:
            raise ValueError(f"transmission period must be a positive integer, got {self.T!r}")
        object.__setattr__(self, "T", int(self.T))

    def gamma(self, k):
        return gamma(self, k)


def gamma(scheme, k):
    """1 if y_k is transmitted, else 0.

    Transmissions happen at k = lT + 1, l = 0, 1, ...; k = 0 never carries a
    transmission (the server starts from its prior).
    """
    T = scheme.T if isinstance(scheme, PeriodicScheme) else int(scheme)
    if k < 0:
        raise ValueError("time index must be non-negative")
    return int(k >= 1 and (k - 1) % T == 0)


def gamma_sequence(T, N, start=0):
    """Vector of gamma_k for k = start, ..., start + N - 1."""
    k = np.arange(start, start + N)
    return ((k >= 1) & ((k - 1) % T == 0)).astype(np.int8)


def check_period_detectable(model, T):
    if not is_detectable(model.C, np.linalg.matrix_power(model.A, T)):
        raise DetectabilityViolation(T)


def periodic_fixed_point(model, T, tol=DEFAULT_TOL, X0=None, steady=None, max_iter=DEFAULT_MAX_ITER):
    """Unique PSD solution of X = g(h^{T-1}(X)); returns a FixedPoint record.

    The default start is P_bar, from which the iteration climbs monotonically.
    """
    T = PeriodicScheme(T).T
    check_period_detectable(model, T)
    if X0 is None:
        steady = steady if steady is not None else solve_steady_state(model, tol=tol)
        X0 = steady.P_bar
    return fixed_point(lambda X: riccati_step(lyapunov_power(X, model, T - 1), model), X0, tol, max_iter)


def covariance_cycle(model, P_tilde, T):
    """[P~, h(P~), ..., h^{T-1}(P~)]."""
    cycle = [np.array(P_tilde, dtype=float)]
    for _ in range(T - 1):
        cycle.append(lyapunov_step(cycle[-1], model))
    return cycle


@dataclass(frozen=True)
class PeriodicAnalysis:
    T: int
    P_tilde: np.ndarray
    cycle: List[np.ndarray]
    P_sup: np.ndarray
    Q_privacy: np.ndarray
    O_star: float
    Q_lqg: float
    Sigma_bar: np.ndarray
    J_star: float
    residual: float
    iters: int

    @property
    def tr_Q_privacy(self):
        return float(np.trace(self.Q_privacy))


def analyze_period(model, T, steady=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Everything that depends on the period: fixed point, cycle, privacy metric and costs."""
    steady = steady if steady is not None else solve_steady_state(model, tol=tol)
    fp = periodic_fixed_point(model, T, tol=tol, steady=steady, max_iter=max_iter)
    cycle = covariance_cycle(model, fp.X, T)
    mean_cov = sum(cycle) / T
    Q_privacy = mean_cov - steady.P_bar
    Q_privacy = (Q_privacy + Q_privacy.T) / 2
    O_star = float(np.trace(steady.S @ model.Q) + np.trace(steady.Phi @ mean_cov))
    Q_lqg = float(np.trace(steady.Phi @ Q_privacy))
    Sigma_bar = lyapunov_step(cycle[-1], model)
    return PeriodicAnalysis(
        T=int(T),
        P_tilde=fp.X,
        cycle=cycle,
        P_sup=cycle[-1],
        Q_privacy=Q_privacy,
        O_star=O_star,
        Q_lqg=Q_lqg,
        Sigma_bar=Sigma_bar,
        J_star=steady.J_star,
        residual=fp.residual,
        iters=fp.iters,
    )


def privacy_metric(model, T, steady=None, tol=DEFAULT_TOL):
    """Average excess of the server's posterior covariance over P_bar."""
    return analyze_period(model, T, steady, tol).Q_privacy


def degraded_cost(model, T, steady=None, tol=DEFAULT_TOL):
    """Optimal average LQG cost under period-T transmission."""
    return analyze_period(model, T, steady, tol).O_star


def lqg_loss(model, T, steady=None, tol=DEFAULT_TOL):
    """tr(Phi Q_privacy), the cost increase caused by withholding measurements."""
    return analyze_period(model, T, steady, tol).Q_lqg


def a_priori_fixed_point(model, T, tol=DEFAULT_TOL, X0=None, max_iter=DEFAULT_MAX_ITER):
    """Solve Sigma = h^T(g~(Sigma)) directly (a-priori covariance at transmission instants)."""
    check_period_detectable(model, T)
    X0 = model.Q if X0 is None else X0
    return fixed_point(lambda X: lyapunov_power(measurement_update(X, model), model, T), X0, tol, max_iter)
