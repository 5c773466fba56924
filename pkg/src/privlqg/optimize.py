"""Choosing the transmission period.

Maximize tr(Q_privacy(T)) subject to Q_lqg(T) <= alpha over integer T in
[T_l, T_r]. When Q_lqg is non-decreasing in T the answer is the largest
feasible T, found by bisection; :func:`linear_scan` makes no such assumption
and serves as the reference.
"""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

from .errors import MonotonicityViolation
from .intermittent import analyze_period, check_period_detectable
from .riccati import DEFAULT_TOL, solve_steady_state

# Absolute slack on the loss constraint; absorbs fixed-point residue at T = 1.
ALPHA_SLACK = 1e-12
DEFAULT_T_RANGE = (1, 50)


class SweepRow(NamedTuple):
    T: int
    tr_Q_privacy: float
    Q_lqg: float


@dataclass(frozen=True)
class TradeoffResult:
    T_star: Optional[int]  # None means infeasible
    sweep: List[SweepRow]
    alpha: float
    method: str
    monotone_verified: bool
    evaluations: List[int] = field(default_factory=list)

    @property
    def feasible(self):
        return self.T_star is not None

    @property
    def Q_lqg_at_T_star(self):
        if self.T_star is None:
            return float("nan")
        return next(r.Q_lqg for r in self.sweep if r.T == self.T_star)


def _check_range(T_l, T_r):
    if not (1 <= T_l <= T_r):
        raise ValueError(f"need 1 <= T_l <= T_r, got [{T_l}, {T_r}]")


def _check_alpha(alpha):
    if not alpha >= 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")


def sweep(model, T_l, T_r, steady=None, tol=DEFAULT_TOL):
    """(T, tr Q_privacy, Q_lqg) for every T in [T_l, T_r]."""
    _check_range(T_l, T_r)
    # fail on the first undetectable period before doing any work
    for T in range(T_l, T_r + 1):
        check_period_detectable(model, T)
    steady = steady if steady is not None else solve_steady_state(model, tol=tol)
    rows = []
    for T in range(T_l, T_r + 1):
        a = analyze_period(model, T, steady=steady, tol=tol)
        rows.append(SweepRow(T, a.tr_Q_privacy, a.Q_lqg))
    return rows


def verify_monotone(rows):
    if not rows:
        raise ValueError("empty sweep")
    losses = [r.Q_lqg for r in rows]
    return all(b >= a for a, b in zip(losses, losses[1:]))


def _feasible(loss, alpha):
    return loss <= alpha + ALPHA_SLACK


def dichotomy_search(model, T_l, T_r, alpha, rows=None, steady=None, tol=DEFAULT_TOL):
    """Largest T in [T_l, T_r] with Q_lqg(T) <= alpha, by integer bisection.

    The monotonicity guard runs over the whole range first (``rows`` may be
    passed in to reuse an existing sweep); if it fails, MonotonicityViolation
    is raised and :func:`linear_scan` should be used instead.
    """
    _check_range(T_l, T_r)
    _check_alpha(alpha)
    if rows is None:
        rows = sweep(model, T_l, T_r, steady=steady, tol=tol)
    if [r.T for r in rows] != list(range(T_l, T_r + 1)):
        raise ValueError("sweep rows do not cover [T_l, T_r] without gaps")
    if not verify_monotone(rows):
        raise MonotonicityViolation(
            f"Q_lqg is not non-decreasing on [{T_l}, {T_r}]; bisection is not valid, use linear_scan"
        )
    loss = {r.T: r.Q_lqg for r in rows}

    T_star = None
    lo, hi = T_l, T_r
    visited = []
    while lo <= hi:
        mid = (lo + hi) // 2
        visited.append(mid)
        if _feasible(loss[mid], alpha):
            T_star = mid
            lo = mid + 1
        else:
            hi = mid - 1
    return TradeoffResult(T_star, list(rows), float(alpha), "dichotomy", True, visited)


def linear_scan(model, T_l, T_r, alpha, rows=None, steady=None, tol=DEFAULT_TOL):
    """Exhaustive search: maximize tr Q_privacy over feasible T, ties to the smaller T."""
    _check_range(T_l, T_r)
    _check_alpha(alpha)
    if rows is None:
        rows = sweep(model, T_l, T_r, steady=steady, tol=tol)
    best = None
    for r in rows:
        if _feasible(r.Q_lqg, alpha) and (best is None or r.tr_Q_privacy > best.tr_Q_privacy):
            best = r
    T_star = None if best is None else best.T
    return TradeoffResult(T_star, list(rows), float(alpha), "linear_scan", verify_monotone(rows), [r.T for r in rows])
