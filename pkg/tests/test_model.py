import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from privlqg.errors import DimensionError
from privlqg.model import (
    SystemModel,
    is_controllable,
    is_detectable,
    is_stabilizable,
    matrix_rank,
    paper_example_model,
    psd_sqrt,
    validate_model,
)


def _model(**kw):
    base = dict(A=np.eye(2), B=[[1.0], [0.0]], C=[[1.0, 0.0]], Q=np.eye(2), R=1.0, W=np.eye(2), U=1.0)
    base.update(kw)
    return SystemModel(**base)


def test_paper_model_passes_all_checks(model):
    report = validate_model(model)
    assert report.overall
    names = [c.name for c in report.checks]
    for expected in ("Q ⪰ 0", "R ≻ 0", "W ⪰ 0", "U ≻ 0", "(A,B) controllable", "(C,A) detectable", "(A,√Q) stabilizable"):
        assert expected in names


def test_zero_input_matrix_fails_controllability():
    report = validate_model(_model(A=np.eye(2), B=np.zeros((2, 1)), C=np.eye(2), R=np.eye(2)))
    failed = {c.name for c in report.failed()}
    assert "(A,B) controllable" in failed
    assert not report.overall


def test_unobserved_unstable_mode_fails_detectability():
    report = validate_model(_model(A=np.diag([2.0, 0.5]), C=[[0.0, 1.0]]))
    assert "(C,A) detectable" in {c.name for c in report.failed()}


def test_indefinite_q_reported():
    report = validate_model(_model(Q=[[1.0, 0.0], [0.0, -1.0]]))
    failed = {c.name for c in report.failed()}
    assert "Q ⪰ 0" in failed
    assert "(A,√Q) stabilizable" in failed


def test_validate_is_pure(model):
    assert validate_model(model) == validate_model(model)


@pytest.mark.parametrize(
    "kw, pair",
    [
        (dict(B=np.ones((3, 1))), ("A", "B")),
        (dict(C=np.ones((1, 3))), ("A", "C")),
        (dict(Q=np.eye(3)), ("A", "Q")),
        (dict(R=np.eye(2)), ("C", "R")),
        (dict(U=np.eye(2)), ("B", "U")),
        (dict(x0_mean=[0.0]), ("A", "x0_mean")),
    ],
)
def test_dimension_errors_name_the_pair(kw, pair):
    with pytest.raises(DimensionError) as exc:
        _model(**kw)
    assert exc.value.pair == pair
    assert pair[0] in str(exc.value) and pair[1] in str(exc.value)


def test_near_symmetric_input_is_symmetrized_and_frozen():
    Q = np.array([[1.0, 0.3 + 5e-11], [0.3, 2.0]])
    m = _model(Q=Q)
    assert np.array_equal(m.Q, m.Q.T)
    with pytest.raises(ValueError):
        m.Q[0, 0] = 5.0


def test_asymmetric_input_rejected():
    with pytest.raises(ValueError, match="not symmetric"):
        _model(Q=[[1.0, 0.5], [0.0, 1.0]])


def test_is_controllable_examples(model):
    # det [B, AB] = 2 for the example pair
    assert abs(np.linalg.det(np.hstack([model.B, model.A @ model.B]))) > 1.0
    assert is_controllable(model.A, model.B)
    assert not is_controllable(model.A, np.zeros((2, 1)))
    rng = np.random.default_rng(0)
    assert is_controllable(rng.standard_normal((3, 3)), np.eye(3))


def test_is_detectable_examples(model):
    # both eigenvalues of the example A lie inside the unit circle
    assert np.all(np.abs(np.linalg.eigvals(model.A)) < 1)
    assert is_detectable(model.C, np.linalg.matrix_power(model.A, 3))
    assert is_detectable(np.zeros((1, 2)), 0.5 * np.eye(2))
    assert not is_detectable(np.zeros((1, 2)), 2 * np.eye(2))


def test_rank_threshold_is_relative():
    assert matrix_rank(np.diag([1e6, 1e-2])) == 2
    assert matrix_rank(np.diag([1e6, 1e-4])) == 1
    assert matrix_rank(np.diag([1.0, 1e-10])) == 1
    assert matrix_rank(np.zeros((2, 2))) == 0


def test_psd_sqrt_clamps_roundoff():
    X = np.array([[1.0, 1.0], [1.0, 1.0]]) - 1e-15 * np.eye(2)
    G = psd_sqrt(X)
    np.testing.assert_allclose(G @ G.T, X, atol=1e-12)
    with pytest.raises(ValueError):
        psd_sqrt(np.diag([1.0, -0.1]))


def _systems(seed, count=100):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, 5))
        q = int(rng.integers(1, n + 1))
        M = rng.standard_normal((n, n)) * rng.uniform(0.2, 2.0)
        C = rng.standard_normal((q, n))
        yield M, C


def test_duality_with_controllability_on_generic_systems():
    # generic random pairs are observable, so detectability and controllability
    # of the dual pair coincide
    for M, C in _systems(1):
        assert is_detectable(C, M) == is_controllable(M.T, C.T)


def test_duality_with_stabilizability_including_degenerate_pairs():
    rng = np.random.default_rng(2)
    for M, C in _systems(3):
        if rng.random() < 0.5:
            C = np.zeros_like(C)  # detectable exactly when M is stable
        assert is_detectable(C, M) == is_stabilizable(M.T, C.T)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_stable_matrices_are_always_detectable(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    M *= 0.95 / max(1e-12, np.max(np.abs(np.linalg.eigvals(M))))
    C = rng.standard_normal((int(rng.integers(1, 3)), n)) * rng.integers(0, 2)
    assert is_detectable(C, M)


def test_paper_example_model_values():
    m = paper_example_model()
    assert (m.n, m.m, m.q) == (2, 1, 1)
    np.testing.assert_array_equal(m.A, [[0.19, 0.46], [0.31, 0.8]])
    np.testing.assert_array_equal(m.x0_cov, np.eye(2))
