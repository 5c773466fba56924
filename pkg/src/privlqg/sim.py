"""Monte-Carlo closed loop and the finite-horizon dynamic-programming cost.

Both exist to check the steady-state formulas from an independent angle.

Random streams
--------------
Trial ``i`` of a run with seed ``s`` draws from ``PCG64(SeedSequence(s,
spawn_key=(i,)))``, i.e. the i-th child of ``SeedSequence(s)``. Within a trial
the draw order is: initial-state normals (n), process-noise normals (N x n),
measurement-noise normals (N x q). Normals come from numpy's ziggurat sampler
and are coloured with a symmetric PSD square root (eigenvalues below 1e-14
clamped to zero). A trial's realization therefore does not depend on how many
other trials run or how they are batched.

Time convention
---------------
Rows are k = 0 .. N-1. At k = 0 the server holds its prior (x0_mean, P_bar)
and no measurement is transmitted; afterwards y_k reaches the server iff
k = lT + 1. The input u_k = L xhat_{k|k} is applied at every k and the stage
cost is x_k'W x_k + u_k'U u_k. States x_0 .. x_N are kept.
"""

import csv
from dataclasses import dataclass
from typing import List, NamedTuple, Optional

import numpy as np

from .intermittent import PeriodicScheme, gamma_sequence
from .model import psd_sqrt
from .riccati import control_terms, kalman_gain, lyapunov_step, solve_steady_state

NOISE_CLAMP_TOL = 1e-14
BATCH_SIZE = 64


def default_burn_in(T):
    return max(100 * T, 1000)


def child_seed(seed, trial):
    return np.random.SeedSequence(int(seed), spawn_key=(int(trial),))


class CovarianceRecursion(NamedTuple):
    gamma: np.ndarray    # (N,)
    P_prior: np.ndarray  # (N, n, n); entry 0 is the initial covariance
    P_post: np.ndarray   # (N, n, n)
    K: np.ndarray        # (N, n, q); zero where nothing is transmitted


def covariance_recursion(model, T, N, P0):
    """Time-varying server-side covariances under period-T transmission.

    Uses the Joseph form (I-KC) P- (I-KC)' + K R K' for the update.
    """
    n, q = model.n, model.q
    gam = gamma_sequence(T, N)
    P_prior = np.empty((N, n, n))
    P_post = np.empty((N, n, n))
    K = np.zeros((N, n, q))
    I = np.eye(n)
    P_prior[0] = P_post[0] = P0
    for k in range(1, N):
        Pm = lyapunov_step(P_post[k - 1], model)
        P_prior[k] = Pm
        if gam[k]:
            Kk = kalman_gain(Pm, model)
            IKC = I - Kk @ model.C
            P = IKC @ Pm @ IKC.T + Kk @ model.R @ Kk.T
            P_post[k] = (P + P.T) / 2
            K[k] = Kk
        else:
            P_post[k] = Pm
    return CovarianceRecursion(gam, P_prior, P_post, K)


@dataclass(frozen=True)
class SimulationTrace:
    seed: int
    T: int
    N: int
    x: np.ndarray           # (N+1, n)
    y: np.ndarray           # (N, q)
    gamma: np.ndarray       # (N,)
    x_hat: np.ndarray       # (N, n)
    u: np.ndarray           # (N, m)
    stage_cost: np.ndarray  # (N,)
    x_hat_full: Optional[np.ndarray] = None  # full-transmission estimator on the same noise
    trial: int = 0

    def write_csv(self, path, comment=None):
        """k, gamma, x_*, xhat_*, [xfull_*], u_*, stage_cost."""
        n, m = self.x.shape[1], self.u.shape[1]
        header = ["k", "gamma"] + [f"x_{i + 1}" for i in range(n)] + [f"xhat_{i + 1}" for i in range(n)]
        if self.x_hat_full is not None:
            header += [f"xfull_{i + 1}" for i in range(n)]
        header += [f"u_{i + 1}" for i in range(m)] + ["stage_cost"]
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for k in range(self.N):
                row = [k, int(self.gamma[k])] + [repr(float(v)) for v in self.x[k]]
                row += [repr(float(v)) for v in self.x_hat[k]]
                if self.x_hat_full is not None:
                    row += [repr(float(v)) for v in self.x_hat_full[k]]
                row += [repr(float(v)) for v in self.u[k]] + [repr(float(self.stage_cost[k]))]
                w.writerow(row)


@dataclass(frozen=True)
class SimulationBatch:
    """Several trials stacked along a leading axis."""

    seed: int
    T: int
    N: int
    trials: np.ndarray      # trial indices
    x: np.ndarray           # (B, N+1, n)
    y: np.ndarray           # (B, N, q)
    gamma: np.ndarray       # (N,)
    x_hat: np.ndarray       # (B, N, n)
    u: np.ndarray           # (B, N, m)
    stage_cost: np.ndarray  # (B, N)
    innovation: np.ndarray  # (B, N, q); NaN where nothing is transmitted
    x_hat_full: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.trials)

    def trace(self, i):
        return SimulationTrace(
            seed=self.seed, T=self.T, N=self.N, x=self.x[i], y=self.y[i], gamma=self.gamma,
            x_hat=self.x_hat[i], u=self.u[i], stage_cost=self.stage_cost[i],
            x_hat_full=None if self.x_hat_full is None else self.x_hat_full[i],
            trial=int(self.trials[i]),
        )

    @property
    def errors(self):
        """x_k - xhat_{k|k} for k = 0..N-1."""
        return self.x[:, : self.N] - self.x_hat


def _draw_noise(model, N, seed, trial_ids):
    n, q = model.n, model.q
    B = len(trial_ids)
    z0 = np.empty((B, n))
    zw = np.empty((B, N, n))
    zv = np.empty((B, N, q))
    for b, i in enumerate(trial_ids):
        rng = np.random.Generator(np.random.PCG64(child_seed(seed, i)))
        z0[b] = rng.standard_normal(n)
        zw[b] = rng.standard_normal((N, n))
        zv[b] = rng.standard_normal((N, q))
    x0 = model.x0_mean + z0 @ psd_sqrt(model.x0_cov, NOISE_CLAMP_TOL).T
    w = zw @ psd_sqrt(model.Q, NOISE_CLAMP_TOL).T
    v = zv @ psd_sqrt(model.R, NOISE_CLAMP_TOL).T
    return x0, w, v


def _rollout(model, steady, T, N, seed, trial_ids, full_estimator=False, P0=None):
    A, B, C = model.A, model.B, model.C
    L = steady.L
    P0 = steady.P_bar if P0 is None else np.asarray(P0, dtype=float)
    rec = covariance_recursion(model, T, N, P0)
    full = covariance_recursion(model, 1, N, P0) if full_estimator else None
    x0, w, v = _draw_noise(model, N, seed, trial_ids)

    nb = len(trial_ids)
    x = np.empty((nb, N + 1, model.n))
    y = np.empty((nb, N, model.q))
    xhat = np.empty((nb, N, model.n))
    u = np.empty((nb, N, model.m))
    innov = np.full((nb, N, model.q), np.nan)
    xfull = np.empty((nb, N, model.n)) if full_estimator else None

    x[:, 0] = x0
    xh = np.broadcast_to(model.x0_mean, (nb, model.n)).copy()
    xf = xh.copy()
    u_prev = None
    for k in range(N):
        xk = x[:, k]
        yk = xk @ C.T + v[:, k]
        y[:, k] = yk
        if k >= 1:
            xh = xh @ A.T + u_prev @ B.T
            if rec.gamma[k]:
                e = yk - xh @ C.T
                innov[:, k] = e
                xh = xh + e @ rec.K[k].T
            if full_estimator:
                xf = xf @ A.T + u_prev @ B.T
                xf = xf + (yk - xf @ C.T) @ full.K[k].T
        xhat[:, k] = xh
        if full_estimator:
            xfull[:, k] = xf
        uk = xh @ L.T
        u[:, k] = uk
        x[:, k + 1] = xk @ A.T + uk @ B.T + w[:, k]
        u_prev = uk

    xs = x[:, :N]
    cost = np.einsum("bki,ij,bkj->bk", xs, model.W, xs) + np.einsum("bki,ij,bkj->bk", u, model.U, u)
    return SimulationBatch(
        seed=int(seed), T=int(T), N=int(N), trials=np.asarray(trial_ids),
        x=x, y=y, gamma=rec.gamma, x_hat=xhat, u=u, stage_cost=cost,
        innovation=innov, x_hat_full=xfull,
    )


def simulate_batch(model, T, N, trials, seed, steady=None, first_trial=0, full_estimator=False, P0=None):
    """Trials ``first_trial .. first_trial + trials - 1`` stacked in one batch.

    ``P0`` is the server's initial covariance; it defaults to P_bar, matching
    the steady-state assumption behind the analytic formulas.
    """
    T = PeriodicScheme(T).T
    if N < 1:
        raise ValueError("horizon N must be >= 1")
    steady = steady if steady is not None else solve_steady_state(model)
    ids = list(range(first_trial, first_trial + trials))
    return _rollout(model, steady, T, N, seed, ids, full_estimator, P0)


def simulate(model, T, N, seed, steady=None, trial=0, full_estimator=True, P0=None):
    """One closed-loop realization; deterministic in (model, T, N, seed, trial)."""
    return simulate_batch(model, T, N, 1, seed, steady, trial, full_estimator, P0).trace(0)


class CostEstimate(NamedTuple):
    mean: float
    se: float
    n_trials: int
    n_steps: int


def empirical_average_cost(traces, burn_in=0, n_batches=20):
    """Mean stage cost after ``burn_in`` and its standard error.

    With several trials the SE comes from the spread of per-trial means. A
    single trace falls back to non-overlapping batch means.
    """
    if isinstance(traces, SimulationBatch):
        costs = traces.stage_cost[:, burn_in:]
    else:
        costs = np.stack([t.stage_cost[burn_in:] for t in traces])
    nt, ns = costs.shape
    if ns == 0:
        raise ValueError("burn-in removes every step")
    if nt >= 2:
        per_trial = costs.mean(axis=1)
        return CostEstimate(float(per_trial.mean()), float(per_trial.std(ddof=1) / np.sqrt(nt)), nt, ns)
    nb = min(n_batches, ns)
    if nb < 2:
        return CostEstimate(float(costs.mean()), float("nan"), nt, ns)
    batches = np.array([b.mean() for b in np.array_split(costs[0], nb)])
    return CostEstimate(float(costs.mean()), float(batches.std(ddof=1) / np.sqrt(nb)), nt, ns)


@dataclass(frozen=True)
class MonteCarloSummary:
    T: int
    N: int
    trials: int
    seed: int
    burn_in: int
    offset_cov: List[np.ndarray]
    offset_counts: List[int]
    time_avg_cov: np.ndarray
    cost: CostEstimate
    innovation_lag_corr: np.ndarray  # per measurement channel, lag T in time
    innovation_samples: int

    @property
    def samples(self):
        return int(sum(self.offset_counts))


def monte_carlo(model, T, N, trials, seed, burn_in=None, steady=None, batch_size=BATCH_SIZE):
    """Run ``trials`` independent closed loops and reduce them in trial order.

    Collects, after discarding ``burn_in`` steps: the estimation-error
    covariance grouped by offset i (steps k = 1 + i mod T), the time-averaged
    error covariance, the average stage cost with its SE, and the lag-one
    autocorrelation of innovations at transmission instants.
    """
    T = PeriodicScheme(T).T
    burn_in = default_burn_in(T) if burn_in is None else int(burn_in)
    if N <= burn_in:
        raise ValueError(f"horizon N={N} must exceed burn_in={burn_in}")
    steady = steady if steady is not None else solve_steady_state(model)
    n, q = model.n, model.q

    k = np.arange(burn_in, N)
    offset = (k - 1) % T
    cnt = np.zeros(T, dtype=np.int64)
    s1 = np.zeros((T, n))
    s2 = np.zeros((T, n, n))
    trial_means = []
    inn_num = np.zeros(q)
    inn_den = np.zeros(q)
    inn_count = 0

    for start in range(0, trials, batch_size):
        nb = min(batch_size, trials - start)
        batch = simulate_batch(model, T, N, nb, seed, steady, first_trial=start)
        e = batch.errors[:, burn_in:]
        for i in range(T):
            ei = e[:, offset == i].reshape(-1, n)
            cnt[i] += ei.shape[0]
            s1[i] += ei.sum(axis=0)
            s2[i] += ei.T @ ei
        trial_means.extend(batch.stage_cost[:, burn_in:].mean(axis=1))
        tx = batch.gamma[burn_in:].astype(bool)
        inn = batch.innovation[:, burn_in:][:, tx]  # (nb, J, q)
        if inn.shape[1] >= 2:
            inn_num += np.sum(inn[:, 1:] * inn[:, :-1], axis=(0, 1))
            inn_den += np.sum(inn * inn, axis=(0, 1))
            inn_count += inn.shape[0] * (inn.shape[1] - 1)

    covs = []
    for i in range(T):
        mean = s1[i] / cnt[i]
        c = (s2[i] - cnt[i] * np.outer(mean, mean)) / max(cnt[i] - 1, 1)
        covs.append((c + c.T) / 2)
    tot = cnt.sum()
    time_avg = sum(covs[i] * cnt[i] for i in range(T)) / tot

    per_trial = np.asarray(trial_means)
    se = float(per_trial.std(ddof=1) / np.sqrt(trials)) if trials >= 2 else float("nan")
    cost = CostEstimate(float(per_trial.mean()), se, trials, N - burn_in)
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = inn_num / inn_den
    return MonteCarloSummary(T, N, trials, int(seed), burn_in, covs, [int(c) for c in cnt],
                             time_avg, cost, corr, int(inn_count))


def empirical_covariance_by_offset(model, T, N, trials, seed, burn_in=None, steady=None):
    """Sample covariance of x_k - xhat_{k|k} at each offset i (k = 1 + i mod T)."""
    return monte_carlo(model, T, N, trials, seed, burn_in, steady).offset_cov


@dataclass(frozen=True)
class FiniteHorizonCost:
    N: int
    S_seq: List[np.ndarray]    # S_0 .. S_N
    Phi_seq: List[np.ndarray]  # Phi_0 .. Phi_{N-1}
    r0: float
    t0: float
    J_0N: float
    initial_term: float        # E(x0' S_0 x0)


def finite_horizon_cost(model, T, N, steady=None, P0=None):
    """Optimal N-step cost under period-T transmission by backward recursion.

    S_N = W, S_k = A'S_{k+1}A + W - Phi_k; r accumulates tr(S_{k+1}Q) and t
    accumulates tr(Phi_k P_k) at transmission instants and tr(Phi_k P_k^-)
    otherwise. Server covariances start from P0 (default P_bar); the k = 0
    term uses P0 itself.
    """
    T = PeriodicScheme(T).T
    if N < 1:
        raise ValueError("horizon N must be >= 1")
    if P0 is None:
        steady = steady if steady is not None else solve_steady_state(model)
        P0 = steady.P_bar
    rec = covariance_recursion(model, T, N, P0)

    A, W, Q = model.A, model.W, model.Q
    S_seq = [None] * (N + 1)
    Phi_seq = [None] * N
    S_seq[N] = np.array(W)
    r = t = 0.0
    for k in range(N - 1, -1, -1):
        S_next = S_seq[k + 1]
        _, Phi = control_terms(S_next, model)
        Phi_seq[k] = Phi
        S = A.T @ S_next @ A + W - Phi
        S_seq[k] = (S + S.T) / 2
        r += float(np.trace(S_next @ Q))
        P = rec.P_post[k] if rec.gamma[k] else rec.P_prior[k]
        t += float(np.trace(Phi @ P))
    S0 = S_seq[0]
    init = float(model.x0_mean @ S0 @ model.x0_mean + np.trace(S0 @ model.x0_cov))
    return FiniteHorizonCost(N, S_seq, Phi_seq, r, t, init + r + t, init)
