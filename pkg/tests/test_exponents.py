import math

import pytest
from hypothesis import given, strategies as st

from essnorm.exponents import conjugate, derive_exponents, holder_identity_check


def test_four_two():
    e = derive_exponents(4, 2)
    assert e.r == pytest.approx(4)
    assert e.s == pytest.approx(2)
    assert e.t == pytest.approx(1)
    assert e.s_star == pytest.approx(2)
    assert holder_identity_check(e)


def test_infinite_p():
    e = derive_exponents(math.inf, 2)
    assert e.r == 2
    assert e.s == 1
    assert e.t is None
    assert e.p_star == 1


def test_small_p_signed_reciprocal():
    e = derive_exponents(2, 4)
    assert e.inv_r == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        e.r


@pytest.mark.parametrize("p,q", [(0.5, 1), (2, 0.9), (2, math.inf), (3, 3)])
def test_rejects(p, q):
    with pytest.raises(ValueError):
        derive_exponents(p, q)


def test_equal_allowed():
    e = derive_exponents(1, 1, allow_equal=True)
    assert e.inv_r == 0


def test_conjugate():
    assert conjugate(1) == math.inf
    assert conjugate(math.inf) == 1
    assert conjugate(4) == pytest.approx(4 / 3)


@given(st.floats(1, 50), st.floats(1e-3, 49))
def test_identities_hold(q, gap):
    p = q + gap
    e = derive_exponents(p, q)
    assert holder_identity_check(e)
    assert abs(1 / p + 1 / e.r - 1 / q) <= 1e-12
    assert abs(1 / e.s + q / p - 1) <= 1e-12
    # r = pq/(p-q), s = p/(p-q)
    assert e.r == pytest.approx(p * q / (p - q), rel=1e-9)
    assert e.s == pytest.approx(p / (p - q), rel=1e-9)
