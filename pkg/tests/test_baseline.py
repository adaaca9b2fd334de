"""Largest-residual baseline allocator."""

import pytest
from hypothesis import given, strategies as st

from iabsim.allocation import allocation_reward, oracle_allocation
from iabsim.baseline import baseline_select
from iabsim.network import SliceKind

V_DEMANDS = (0.81, 0.54, 0.22)
V_RESIDUALS = (0.50, 0.39, 0.65, 0.75, 0.41, 0.37, 0.52)


def test_worked_example_selection():
    decisions, total = baseline_select(V_DEMANDS, V_RESIDUALS)
    assert [d.chosen_bs for d in decisions] == [4, 3, 7]
    assert decisions[0].reward == pytest.approx(0.9964, abs=1e-12)
    assert decisions[1].reward == 1.0
    assert decisions[2].reward == 1.0
    assert total == pytest.approx(2.9964, abs=1e-12)
    assert [d.slice_kind for d in decisions] == [SliceKind.EMBB, SliceKind.URLLC, SliceKind.EMTC]


def test_abundant_residuals_score_three():
    _, total = baseline_select((0.2, 0.3, 0.1), (0.9, 0.95, 0.99, 0.8, 0.85, 0.9, 0.88))
    assert total == 3.0


def test_all_zero_residuals():
    demands = (0.4, 0.2, 0.1)
    decisions, total = baseline_select(demands, (0.0,) * 7)
    assert all(d.granted == 0.0 for d in decisions)
    assert total == pytest.approx(sum(1 - r**2 for r in demands), abs=1e-12)


def test_ties_pick_lowest_index():
    decisions, _ = baseline_select((0.1, 0.1, 0.1), (0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5))
    assert [d.chosen_bs for d in decisions] == [1, 2, 3]


def test_consumption_is_full():
    decisions, _ = baseline_select((0.9, 0.9, 0.9), (0.7, 0.6, 0.5, 0.0, 0.0, 0.0, 0.0))
    assert [d.granted for d in decisions] == [0.7, 0.6, 0.5]


@given(
    st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
    st.lists(st.floats(0, 1), min_size=7, max_size=7),
)
def test_reward_bounds_and_rule(demands, residuals):
    decisions, total = baseline_select(demands, residuals)
    assert 0.0 <= total <= 3.0
    for d in decisions:
        assert 0.0 <= d.reward <= 1.0
        if d.granted >= d.demand:
            assert d.reward == 1.0
        else:
            assert d.reward == pytest.approx(1 - (d.granted - d.demand) ** 2)


@given(
    st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
    st.lists(st.floats(0, 1), min_size=7, max_size=7),
)
def test_oracle_dominates_baseline_under_quadratic_scoring(demands, residuals):
    decisions, _ = baseline_select(demands, residuals)
    quad = sum(allocation_reward(d.granted, d.demand) for d in decisions)
    _, best = oracle_allocation(demands, residuals)
    assert best >= quad - 1e-9
