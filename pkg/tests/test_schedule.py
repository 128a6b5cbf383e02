"""Capacity schedule: frozen profiles, regimes, and arithmetic invariants."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ringload.allocator import CapacitySchedule, compute_schedule
from ringload.errors import EmptySystemError


def test_uneven_profile():
    s = compute_schedule(10, 4, Fraction(5, 4), [1, 2, 3, 4])
    assert s.capacities == (4, 3, 3, 3)
    assert s.total == 13 == math.ceil(Fraction(5, 4) * 10)


def test_sparse_regime_all_ones():
    # c*m < n pins every capacity at 1
    s = compute_schedule(2, 10, Fraction(3, 2), list(range(10)))
    assert s.capacities == (1,) * 10
    assert s.total == 10


def test_exact_division():
    s = compute_schedule(8, 4, 2, [7, 8, 9, 10])
    assert s.capacities == (4, 4, 4, 4)


def test_zero_balls():
    s = compute_schedule(0, 3, Fraction(3, 2), [1, 2, 3])
    assert s.capacities == (1, 1, 1)


def test_float_c_uses_decimal_meaning():
    s = compute_schedule(100, 10, 1.05, list(range(10)))
    assert s.c == Fraction(21, 20)
    assert s.total == 105


def test_capacity_attaches_to_rank_not_id():
    order = [30, 10, 20]
    s = compute_schedule(4, 3, Fraction(5, 4), order)
    # ceil(5) = 5 over 3 bins: q=1, k=2, first two ranks get 2
    assert s.capacities == (2, 2, 1)
    assert dict(zip(s.ordered_bins, s.capacities)) == {30: 2, 10: 2, 20: 1}


def test_no_bins_rejected():
    with pytest.raises(EmptySystemError):
        compute_schedule(5, 0, 2, [])


@pytest.mark.parametrize("c", [1, Fraction(1, 1), 0.5, Fraction(2, 3)])
def test_c_at_most_one_rejected(c):
    with pytest.raises(ValueError):
        compute_schedule(5, 2, c, [1, 2])


def test_negative_m_rejected():
    with pytest.raises(ValueError):
        compute_schedule(-1, 2, 2, [1, 2])


def test_order_length_mismatch_rejected():
    with pytest.raises(ValueError):
        compute_schedule(5, 3, 2, [1, 2])


@settings(max_examples=300, deadline=None)
@given(
    m=st.integers(0, 500),
    n=st.integers(1, 60),
    cnum=st.integers(1, 400),
    cden=st.integers(1, 100),
)
def test_profile_invariants(m, n, cnum, cden):
    c = Fraction(cnum, cden) + 1  # anything strictly above 1
    s = compute_schedule(m, n, c, list(range(n)))
    caps = s.capacities
    assert len(caps) == n
    assert min(caps) >= 1
    assert max(caps) - min(caps) <= 1
    assert sorted(caps, reverse=True) == list(caps)
    if c * m < n:
        assert s.total == n
        assert set(caps) == {1}
    else:
        assert s.total == math.ceil(c * m)
        assert s.total >= m


def test_total_property_matches_sum():
    s = CapacitySchedule(m=3, n=2, c=Fraction(2), ordered_bins=(1, 2), capacities=(3, 3))
    assert s.total == 6
