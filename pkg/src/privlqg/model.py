"""Plant/sensor/cost description and the structural tests the analysis relies on.

The plant is

    x_{k+1} = A x_k + B u_k + w_k,   w_k ~ N(0, Q)
    y_k     = C x_k + v_k,           v_k ~ N(0, R)

with quadratic stage cost x'Wx + u'Uu and x_0 ~ N(x0_mean, x0_cov).
"""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from .errors import DimensionError

SYMMETRY_TOL = 1e-10
RANK_TOL = 1e-9
SQRT_CLAMP_TOL = 1e-12
PSD_TOL = 1e-12


def _as_matrix(name, value):
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(name, name, f"expected a matrix, got array of shape {arr.shape}")
    return arr


def _symmetrize(name, X, tol=SYMMETRY_TOL):
    if X.shape[0] != X.shape[1]:
        raise DimensionError(name, name, f"must be square, got {X.shape}")
    asym = np.max(np.abs(X - X.T)) if X.size else 0.0
    if asym > tol:
        raise ValueError(f"{name} is not symmetric (max |X - X'| = {asym:.3e})")
    return (X + X.T) / 2


def _freeze(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemModel:
    """Immutable container for (A, B, C, Q, R, W, U, x0_mean, x0_cov).

    Scalars are accepted for 1x1 matrices. Symmetric fields within
    ``SYMMETRY_TOL`` of symmetric are replaced by (X + X')/2; dimensions are
    checked on construction. Definiteness is *not* enforced here, see
    :func:`validate_model`. ``x0_mean`` defaults to zero and ``x0_cov`` to the
    identity.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    W: np.ndarray
    U: np.ndarray
    x0_mean: Optional[np.ndarray] = None
    x0_cov: Optional[np.ndarray] = None

    def __post_init__(self):
        mats = {k: _as_matrix(k, getattr(self, k)) for k in "ABCQRWU"}
        A, B, C = mats["A"], mats["B"], mats["C"]
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError("A", "A", f"must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionError("A", "B", f"A is {A.shape}, B is {B.shape}")
        if C.shape[1] != n:
            raise DimensionError("A", "C", f"A is {A.shape}, C is {C.shape}")
        m, q = B.shape[1], C.shape[0]
        for name, size, ref in (("Q", n, "A"), ("W", n, "A"), ("R", q, "C"), ("U", m, "B")):
            X = mats[name]
            if X.shape != (size, size):
                raise DimensionError(ref, name, f"expected {name} of shape {(size, size)}, got {X.shape}")
            mats[name] = _symmetrize(name, X)

        x0_mean = np.zeros(n) if self.x0_mean is None else np.array(self.x0_mean, dtype=float).reshape(-1)
        if x0_mean.shape != (n,):
            raise DimensionError("A", "x0_mean", f"expected length {n}, got {x0_mean.shape}")
        x0_cov = np.eye(n) if self.x0_cov is None else _as_matrix("x0_cov", self.x0_cov)
        if x0_cov.shape != (n, n):
            raise DimensionError("A", "x0_cov", f"expected shape {(n, n)}, got {x0_cov.shape}")
        mats["x0_mean"] = x0_mean
        mats["x0_cov"] = _symmetrize("x0_cov", x0_cov)

        for k, v in mats.items():
            object.__setattr__(self, k, _freeze(v))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def q(self):
        return self.C.shape[0]

    def replace(self, **changes):
        """Return a copy with some fields swapped out."""
        fields = {k: getattr(self, k) for k in ("A", "B", "C", "Q", "R", "W", "U", "x0_mean", "x0_cov")}
        fields.update(changes)
        return SystemModel(**fields)

    def to_dict(self):
        """Plain nested-list representation, the same layout the config file uses."""
        return {
            k: getattr(self, k).tolist()
            for k in ("A", "B", "C", "Q", "R", "W", "U", "x0_mean", "x0_cov")
        }


def paper_example_model():
    """The second-order example system used throughout the docs and tests.

    The initial state distribution is not part of that example; zero mean and
    identity covariance are used.
    """
    return SystemModel(
        A=[[0.19, 0.46], [0.31, 0.8]],
        B=[[2.0], [1.0]],
        C=[[1.0, 0.0]],
        Q=[[1.9, 0.9], [0.9, 2.8]],
        R=[[1.0]],
        W=[[1.5, 0.5], [0.5, 1.5]],
        U=[[1.0]],
    )


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def overall(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def render(self):
        width = max((len(c.name) for c in self.checks), default=5)
        lines = [f"{'check':<{width}}  result  detail"]
        for c in self.checks:
            lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<6}  {c.detail}")
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines)


def matrix_rank(M, tol=RANK_TOL):
    """Rank by relative singular-value thresholding: sigma_i > tol * sigma_max."""
    M = np.atleast_2d(M)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def psd_sqrt(X, clamp_tol=SQRT_CLAMP_TOL):
    """Symmetric factor G with G G' = X.

    Eigenvalues in [-clamp_tol * max(1, |X|), 0) are clamped to zero; anything
    more negative means X is not PSD and raises.
    """
    X = (np.asarray(X, dtype=float) + np.asarray(X, dtype=float).T) / 2
    w, V = np.linalg.eigh(X)
    floor = -clamp_tol * max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    if w.size and w.min() < floor:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def _unstable_eigs(M):
    # closed unit circle; the tiny slack keeps |lambda| = 1 exactly in the test set
    lam = np.linalg.eigvals(M)
    return lam[np.abs(lam) >= 1.0 - 1e-12]


def is_controllable(A, B, tol=RANK_TOL):
    """Kalman rank test on [B, AB, ..., A^{n-1}B]."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return matrix_rank(np.hstack(blocks), tol) == n


def is_stabilizable(A, B, tol=RANK_TOL):
    """PBH: rank [A - lambda I, B] = n for every |lambda| >= 1."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    n = A.shape[0]
    I = np.eye(n)
    return all(matrix_rank(np.hstack([A - lam * I, B]), tol) == n for lam in _unstable_eigs(A))


def is_detectable(C, M, tol=RANK_TOL):
    """PBH: rank [M - lambda I; C] = n for every eigenvalue |lambda| >= 1 of M."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[0]
    C = np.asarray(C, dtype=float).reshape(-1, n)
    if M.shape != (n, n):
        raise DimensionError("M", "M", f"must be square, got {M.shape}")
    I = np.eye(n)
    return all(matrix_rank(np.vstack([M - lam * I, C]), tol) == n for lam in _unstable_eigs(M))


def _psd_check(name, X, strict):
    w = np.linalg.eigvalsh(X)
    lo = float(w.min()) if w.size else 0.0
    if strict:
        try:
            np.linalg.cholesky(X)
            ok = lo > 0
        except np.linalg.LinAlgError:
            ok = False
        return Check(f"{name} ≻ 0", ok, f"min eigenvalue {lo:.6g}")
    ok = lo >= -PSD_TOL * max(1.0, float(np.abs(w).max()) if w.size else 1.0)
    return Check(f"{name} ⪰ 0", ok, f"min eigenvalue {lo:.6g}")


def validate_model(model, rank_tol=RANK_TOL):
    """Run the standing assumptions against ``model`` and collect the outcomes."""
    checks = [
        _psd_check("Q", model.Q, strict=False),
        _psd_check("R", model.R, strict=True),
        _psd_check("W", model.W, strict=False),
        _psd_check("U", model.U, strict=True),
        _psd_check("Σ₀", model.x0_cov, strict=False),
    ]
    ctrb = is_controllable(model.A, model.B, rank_tol)
    checks.append(Check("(A,B) controllable", ctrb, "rank [B AB ... A^(n-1)B] " + ("= n" if ctrb else "< n")))
    det = is_detectable(model.C, model.A, rank_tol)
    checks.append(Check("(C,A) detectable", det, "PBH on |λ| ≥ 1 " + ("ok" if det else "fails")))
    try:
        G = psd_sqrt(model.Q)
    except ValueError as exc:
        checks.append(Check("(A,√Q) stabilizable", False, str(exc)))
    else:
        stab = is_stabilizable(model.A, G, rank_tol)
        checks.append(Check("(A,√Q) stabilizable", stab, "PBH on |λ| ≥ 1 " + ("ok" if stab else "fails")))
    return ValidationReport(checks)
