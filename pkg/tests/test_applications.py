import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memgrid import (
    CrossbarState,
    DimensionError,
    DomainError,
    MemductanceModel,
    RangeError,
    SignedSplit,
    WriteConfig,
    flux_from_memductance,
    least_squares,
    make_signed_split,
    matvec,
    matvec_signed,
)
from memgrid.applications import split_targets

from .conftest import states


def programmed(model, w):
    """State whose memductances equal ``w`` exactly (by inversion, no writing)."""
    w = np.asarray(w, dtype=float)
    m, n = w.shape
    phi = [flux_from_memductance(model, w[k, l]) for l in range(n) for k in range(m)]
    return CrossbarState.uniform(m, n, model, phi)


def test_matvec_examples(state22):
    np.testing.assert_allclose(matvec(state22, [1, 2]), [7, 5.5], rtol=1e-12)
    c, after = matvec(state22, [0, 0], return_state=True)
    assert not c.any()
    np.testing.assert_array_equal(after.phi, state22.phi)
    W = state22.memductances()
    for l in range(2):
        e = np.eye(2)[l]
        np.testing.assert_allclose(matvec(state22, e), W[:, l], rtol=1e-12)


def test_matvec_errors(state22):
    with pytest.raises(DimensionError):
        matvec(state22, [1, 2, 3])
    with pytest.raises(ValueError):
        matvec(state22, [1, 2], tau=0.5, s=0.5)


def test_matvec_affine_domain_excursion():
    aff = MemductanceModel.affine(1.0, 0.5, 0.0, 4.0)
    state = CrossbarState.uniform(1, 1, aff, [0.5])
    with pytest.raises(DomainError):
        matvec(state, [2.0], tau=0.5)
    c = matvec(state, [0.5], tau=0.5)
    assert c[0] == pytest.approx(0.5 * 1.25)


@given(states(max_dim=6, closed=True), st.data())
def test_matvec_oracle_linearity_and_restoration(state, data):
    vec = st.lists(st.floats(-3, 3), min_size=state.n, max_size=state.n)
    b1 = np.array(data.draw(vec))
    b2 = np.array(data.draw(vec))
    W = state.memductances()
    c1, after = matvec(state, b1, return_state=True)
    assert np.linalg.norm(c1 - W @ b1) <= 1e-9 * (np.linalg.norm(W @ b1) + 1)
    np.testing.assert_allclose(after.phi, state.phi, rtol=0, atol=1e-12)
    c2 = matvec(state, b2)
    c12 = matvec(state, b1 + b2)
    np.testing.assert_allclose(c12, c1 + c2, rtol=0, atol=1e-9 * (np.abs(c12).max() + 1))


def test_split_targets_examples(sig):
    b, c = split_targets([[0.0]], sig)
    assert b[0, 0] == c[0, 0] == 2.0
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    with pytest.raises(RangeError) as exc:
        split_targets(A, sig)
    assert exc.value.scale == pytest.approx(0.9)
    b, c = split_targets(0.4 * A, sig)
    np.testing.assert_allclose(b, [[2.4, 2.0], [2.0, 2.4]])
    np.testing.assert_allclose(c, [[2.0, 2.4], [2.4, 2.0]])
    with pytest.raises(RangeError, match="0.1"):
        split_targets(9.0 * A, sig)


def test_signed_matvec_exact_programming(sig):
    A = 0.4 * np.array([[1.0, -1.0], [-1.0, 1.0]])
    b, c = split_targets(A, sig)
    split = SignedSplit(programmed(sig, b), programmed(sig, c))
    np.testing.assert_allclose(matvec_signed(split, [1, 1]), [0, 0], atol=1e-12)
    assert not matvec_signed(split, [0, 0]).any()
    x = np.array([0.3, -2.0])
    np.testing.assert_allclose(matvec_signed(split, x), A @ x, rtol=1e-9, atol=1e-12)


def test_signed_split_written(sig):
    rng = np.random.default_rng(5)
    A = rng.uniform(-0.8, 0.8, (3, 2))
    cfg = WriteConfig(alpha=2.0, period=1.0, epsilon=1e-3)
    split = make_signed_split(A, sig, cfg)
    assert np.all(np.abs(split.matrix() - A) <= 2e-3)
    # positive matrix: C stays at the offset
    P = rng.uniform(0.1, 0.8, (2, 2))
    split = make_signed_split(P, sig, cfg, mode="sequential")
    np.testing.assert_allclose(split.c_part.memductances(), 2.0, atol=1e-3)
    x = rng.normal(size=2)
    direct = (split.b_part.memductances() - split.c_part.memductances()) @ x
    np.testing.assert_allclose(matvec_signed(split, x), direct, rtol=1e-9, atol=1e-12)


def test_least_squares_example(sig):
    state = programmed(sig, [[2.0, 1.5], [1.5, 2.0]])
    M = np.array([[2.0, 1.5], [1.5, 2.0]])
    c = np.array([2.0, 1.5])
    oracle = np.linalg.solve(M @ M.T, M @ -c)  # normal equations of min ||M^T y + c||
    y = least_squares(state, c)
    np.testing.assert_allclose(y, [-1.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(y, oracle, atol=1e-12)
    assert not least_squares(state, [0, 0]).any()
    with pytest.raises(DimensionError):
        least_squares(state, [1.0])


@pytest.mark.parametrize("seed", range(5))
def test_least_squares_tall_matches_pinv(sig, seed):
    rng = np.random.default_rng(seed)
    M = rng.uniform(1.05, 2.95, (3, 2))
    c = rng.normal(size=2)
    y = least_squares(programmed(sig, M), c)
    M = programmed(sig, M).memductances()
    oracle = -np.linalg.pinv(M.T) @ c
    np.testing.assert_allclose(y, oracle, rtol=1e-8, atol=1e-12)
    assert np.linalg.norm(M.T @ y + c) <= 1e-10 * np.linalg.norm(c)


@pytest.mark.parametrize("seed", range(5))
def test_least_squares_wide_is_optimal(sig, seed):
    # more columns than rows: residual cannot vanish, y must still minimize it
    rng = np.random.default_rng(seed)
    state = programmed(sig, rng.uniform(1.05, 2.95, (2, 4)))
    M = state.memductances()
    c = rng.normal(size=4)
    y = least_squares(state, c)
    r0 = np.linalg.norm(M.T @ y + c)
    for _ in range(100):
        d = rng.normal(size=2) * rng.choice([1e-6, 1e-3, 1.0])
        assert np.linalg.norm(M.T @ (y + d) + c) >= r0 - 1e-12
    np.testing.assert_allclose(y, -np.linalg.pinv(M.T) @ c, rtol=1e-8, atol=1e-12)


def test_least_squares_rank_deficient_min_norm(sig):
    # identical rows: rank 1, minimum-norm solution splits evenly
    state = programmed(sig, [[2.0, 2.5], [2.0, 2.5]])
    M = state.memductances()
    c = np.array([1.0, -0.5])
    y = least_squares(state, c)
    np.testing.assert_allclose(y, -np.linalg.pinv(M.T) @ c, rtol=1e-8, atol=1e-12)
    assert y[0] == pytest.approx(y[1], rel=1e-12)
