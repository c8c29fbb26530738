import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memgrid import (
    CrossbarState,
    DimensionError,
    DomainError,
    MemductanceModel,
    PiecewiseConstantSignal,
    SignalGapError,
    TerminalPotentials,
    advance,
    branch_voltages,
    build_incidence,
    terminal_currents,
)
from memgrid.network import measure, power, simulate, superpose

from .conftest import states


def _dense_currents(state, p):
    """J = D S W S D^T P with every matrix materialized."""
    D = build_incidence(state.m, state.n)
    S = np.diag(state.switches.reshape(-1, order="F").astype(float))
    W = np.diag(state.memductances().reshape(-1, order="F"))
    return D @ S @ W @ S @ D.T @ p.stacked()


def test_incidence_2x2():
    expected = np.array([[1, 1, 0, 0], [0, 0, 1, 1], [-1, 0, -1, 0], [0, -1, 0, -1]])
    np.testing.assert_array_equal(build_incidence(2, 2), expected)
    np.testing.assert_array_equal(build_incidence(1, 1), [[1], [-1]])


@pytest.mark.parametrize("m,n", [(1, 1), (1, 4), (3, 2), (5, 5)])
def test_incidence_structure(m, n):
    D = build_incidence(m, n)
    assert D.shape == (n + m, m * n)
    np.testing.assert_array_equal(D.sum(axis=0), 0)
    assert np.all((D == 1).sum(axis=0) == 1)
    assert np.all((D == -1).sum(axis=0) == 1)
    assert np.linalg.matrix_rank(D) == m + n - 1
    for k in range(m):
        for l in range(n):
            col = D[:, k + m * l]
            assert col[l] == 1 and col[n + k] == -1


def test_branch_voltages_examples(sig):
    st_ = CrossbarState.uniform(2, 2, sig)
    p = TerminalPotentials([1, 0], [0, 0])
    np.testing.assert_array_equal(branch_voltages(st_, p), [1, 1, 0, 0])
    np.testing.assert_array_equal(branch_voltages(st_, TerminalPotentials.zeros(2, 2)), 0)
    one = st_.with_switches([[1, 0], [0, 0]])
    np.testing.assert_array_equal(branch_voltages(one, TerminalPotentials([1, 1], [0, 0])), [1, 0, 0, 0])


def test_branch_voltages_match_incidence(state22):
    p = TerminalPotentials([0.3, -1.2], [0.7, 2.0])
    D = build_incidence(2, 2)
    np.testing.assert_allclose(branch_voltages(state22, p), D.T @ p.stacked(), rtol=0, atol=1e-15)


def test_terminal_currents_examples(sig):
    st_ = CrossbarState.uniform(2, 2, sig)
    j = terminal_currents(st_, TerminalPotentials([1, 0], [0, 0]))
    np.testing.assert_allclose(j.j_a, [4, 0])
    np.testing.assert_allclose(j.j_b, [-2, -2])
    j0 = terminal_currents(st_, TerminalPotentials.zeros(2, 2))
    assert not j0.j_a.any() and not j0.j_b.any()
    jo = terminal_currents(st_.with_switches(np.zeros((2, 2))), TerminalPotentials([1, 0], [0, 0]))
    assert not jo.j_a.any() and not jo.j_b.any()


def test_dimension_errors(state22):
    with pytest.raises(DimensionError):
        terminal_currents(state22, TerminalPotentials([1, 0, 0], [0, 0]))
    with pytest.raises(DimensionError):
        CrossbarState.uniform(2, 2, state22.model(0, 0), [0, 0, 0])
    with pytest.raises(DimensionError):
        CrossbarState.uniform(0, 2, state22.model(0, 0))


@given(states(), st.data())
def test_currents_match_dense_oracle(state, data):
    p = TerminalPotentials(
        data.draw(st.lists(st.floats(-5, 5), min_size=state.n, max_size=state.n)),
        data.draw(st.lists(st.floats(-5, 5), min_size=state.m, max_size=state.m)),
    )
    j = terminal_currents(state, p)
    np.testing.assert_allclose(j.stacked(), _dense_currents(state, p), rtol=1e-12, atol=1e-12)
    scale = np.abs(j.j_a).sum() + np.abs(j.j_b).sum() + 1
    assert abs(j.j_a.sum() + j.j_b.sum()) <= 1e-12 * scale
    assert power(p, j) >= -1e-12 * scale


@given(states(), st.floats(-10, 10))
def test_currents_linear_in_potentials(state, alpha):
    rng = np.random.default_rng(0)
    p = TerminalPotentials(rng.normal(size=state.n), rng.normal(size=state.m))
    j1 = terminal_currents(state, alpha * p).stacked()
    j2 = alpha * terminal_currents(state, p).stacked()
    np.testing.assert_allclose(j1, j2, rtol=1e-12, atol=1e-12 * (np.abs(j2).max() + 1e-300))


def test_advance_example(sig):
    st_ = CrossbarState.uniform(2, 2, sig)
    sig_ = PiecewiseConstantSignal.constant(TerminalPotentials([1, 0], [0, 0]))
    out = advance(st_, sig_, 0.0, 0.5)
    np.testing.assert_array_equal(out.phi - st_.phi, [0.5, 0.5, 0, 0])


@given(states(), st.floats(0, 100))
def test_zero_input_is_equilibrium(state, dt):
    z = PiecewiseConstantSignal.constant(TerminalPotentials.zeros(state.m, state.n))
    out = advance(state, z, 0.0, dt)
    assert np.array_equal(out.phi, state.phi)


@given(states(closed=True), st.floats(0.01, 2.0), st.floats(0.1, 3.0), st.integers(0, 10))
def test_zero_mean_pulse_restores_column(state, tau, amp, col):
    l = col % state.n
    p = [TerminalPotentials.zeros(state.m, state.n)]
    vals = []
    for v in (-amp, amp, -amp, 0.0):
        pa = np.zeros(state.n)
        pa[l] = v
        vals.append(TerminalPotentials(pa, np.zeros(state.m)))
    sig_ = PiecewiseConstantSignal((0.0, tau, 2 * tau, 4 * tau, 5 * tau), tuple(p + vals))
    out = advance(state, sig_, 0.0, 6 * tau)
    np.testing.assert_allclose(out.phi, state.phi, rtol=0, atol=1e-12)


@given(states(), st.floats(0.01, 3.0), st.floats(0.0, 1.0))
def test_split_interval_is_exact(state, dt, frac):
    rng = np.random.default_rng(1)
    p = TerminalPotentials(rng.uniform(-1, 1, state.n), rng.uniform(-1, 1, state.m))
    sig_ = PiecewiseConstantSignal.constant(p)
    whole = advance(state, sig_, 0.0, dt)
    mid = frac * dt
    split = advance(advance(state, sig_, 0.0, mid), sig_, mid, dt)
    np.testing.assert_allclose(split.phi, whole.phi, rtol=0, atol=1e-15 * max(1.0, np.abs(whole.phi).max()) * 8)


def test_affine_domain_exit_reports_crossing():
    aff = MemductanceModel.affine(1.0, 0.5, 0.0, 4.0)
    st_ = CrossbarState.uniform(1, 1, aff, [3.0])
    sig_ = PiecewiseConstantSignal.constant(TerminalPotentials([2.0], [0.0]))
    with pytest.raises(DomainError, match=r"t=0\.5"):
        advance(st_, sig_, 0.0, 1.0)
    with pytest.raises(DomainError):
        CrossbarState.uniform(1, 1, aff, [5.0])


def test_signal_conventions():
    a = TerminalPotentials([1.0], [0.0])
    b = TerminalPotentials([2.0], [0.0])
    s = PiecewiseConstantSignal((0.0, 1.0), (a, b), end=3.0)
    assert s.value_at(0.5).p_a[0] == 1.0
    assert s.value_at(1.0).p_a[0] == 2.0
    assert s.left_limit(1.0).p_a[0] == 1.0
    assert s.left_limit(3.0).p_a[0] == 2.0
    with pytest.raises(SignalGapError):
        s.value_at(3.0)
    with pytest.raises(ValueError):
        PiecewiseConstantSignal((0.0, 1.0, 1.0), (a, b, a))
    with pytest.raises(ValueError):
        PiecewiseConstantSignal((0.5,), (a,))


def test_signal_gap_error(state22):
    s = PiecewiseConstantSignal.constant(TerminalPotentials.zeros(2, 2), end=1.0)
    with pytest.raises(SignalGapError):
        advance(state22, s, 0.0, 2.0)


def test_superpose_adds_values():
    a = PiecewiseConstantSignal((0.0, 1.0), (TerminalPotentials([1.0, 0], [0]), TerminalPotentials([0.0, 0], [0])))
    b = PiecewiseConstantSignal((0.0, 0.5), (TerminalPotentials([0.0, 0], [0]), TerminalPotentials([0.0, 3], [0])))
    s = superpose([a, b])
    assert s.breakpoints == (0.0, 0.5, 1.0)
    np.testing.assert_array_equal(s.value_at(0.7).p_a, [1.0, 3.0])
    np.testing.assert_array_equal(s.value_at(1.2).p_a, [0.0, 3.0])


def test_switch_pattern_rides_on_signal(sig):
    st_ = CrossbarState.uniform(2, 2, sig)
    sw = np.array([[1, 0], [0, 0]], bool)
    s = PiecewiseConstantSignal.constant(TerminalPotentials([1.0, 1.0], [0, 0]), sw)
    out = advance(st_, s, 0.0, 0.25)
    np.testing.assert_array_equal(out.phi, [0.25, 0, 0, 0])
    np.testing.assert_array_equal(out.switches, sw)
    j = measure(out, s, 0.25, left=True)
    np.testing.assert_allclose(j.j_b, [-(1 + 2 / (1 + math.exp(-0.25))), 0])


def test_simulate_records_samples(state22):
    s = PiecewiseConstantSignal.constant(TerminalPotentials([1.0, 0.0], [0, 0]))
    final, rows = simulate(state22, s, [0.0, 0.5, 1.0], record_flux=True)
    assert [r.time for r in rows] == [0.0, 0.5, 1.0]
    np.testing.assert_allclose(rows[1].phi - state22.phi, [0.5, 0.5, 0, 0])
    np.testing.assert_array_equal(final.phi, rows[-1].phi)
