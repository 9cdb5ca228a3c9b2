import pytest
from hypothesis import given, strategies as st

from bluetrust.metrics import delta_r, delta_r_normalized, utilization
from bluetrust.trust import DomainError


def test_identical_tables():
    t = {(0, 1): 0.5, (1, 0): 0.2}
    assert delta_r(t, dict(t)) == 0.0


def test_single_change():
    assert delta_r({(0, 1): 0.4}, {(0, 1): 0.6}) == pytest.approx(0.2)


def test_three_pairs_brute_force():
    prev = {(0, 1): 0.1, (0, 2): 0.5, (2, 1): 0.9}
    curr = {(0, 1): 0.2, (0, 2): 0.4, (2, 1): 0.8}
    expected = sum(abs(curr[k] - prev[k]) for k in prev)
    assert delta_r(prev, curr) == pytest.approx(expected)
    assert expected == pytest.approx(0.3)
    assert delta_r_normalized(prev, curr) == pytest.approx(0.1)


def test_new_pairs_are_skipped():
    assert delta_r({(0, 1): 0.5}, {(0, 1): 0.5, (1, 0): 1.0}) == 0.0
    assert delta_r_normalized({}, {(1, 0): 1.0}) == 0.0


@pytest.mark.parametrize("delivered, cap, expected", [
    ([], 500, 0.0),
    ([250, 250], 500, 1.0),
    ([100, 250], 500, 0.7),
])
def test_utilization(delivered, cap, expected):
    assert utilization(delivered, cap) == pytest.approx(expected)


def test_utilization_zero_capacity():
    with pytest.raises(DomainError):
        utilization([1.0], 0)


keys = st.tuples(st.integers(0, 5), st.integers(0, 5))
tables = st.dictionaries(keys, st.floats(0, 1), max_size=20)


@given(tables, tables, tables)
def test_symmetric_and_triangle(a, b, c):
    assert delta_r(a, b) == pytest.approx(delta_r(b, a))
    # triangle holds over pairs common to all three snapshots
    common = set(a) & set(b) & set(c)
    a, b, c = ({k: t[k] for k in common} for t in (a, b, c))
    assert delta_r(a, c) <= delta_r(a, b) + delta_r(b, c) + 1e-12
