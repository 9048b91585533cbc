import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from essnorm.exponents import derive_exponents
from essnorm.measure_model import (
    DyadicAlgebra,
    GridFunction,
    MeasureSpace,
    conditional_expectation,
    halving_split,
    lp_norm,
    sign_witness,
    tail_truncation,
)

Q42 = derive_exponents(4, 2)


def test_parse_mixed_space():
    sp = MeasureSpace.parse("atoms: a=0.25, b=0.25; diffuse: m=4, density=0.5")
    assert sp.natoms == 2
    assert sp.ncells == 16
    assert sp.total_mass == pytest.approx(1.0)
    assert sp.diffuse_mass == pytest.approx(0.5)


def test_parse_errors():
    with pytest.raises(ValueError):
        MeasureSpace.parse("atoms: a")
    with pytest.raises(ValueError):
        MeasureSpace.parse("blob: m=3")
    with pytest.raises(ValueError):
        MeasureSpace([("a", -1.0)])


def test_lp_norm_of_x():
    sp = MeasureSpace.lebesgue(16)
    u = GridFunction.from_callable(sp, lambda x: x)
    # midpoint rule error is O(2^-32)
    assert lp_norm(u, 4) == pytest.approx(0.2**0.25, abs=1e-9)
    assert lp_norm(u, math.inf) == pytest.approx(1 - 2.0**-17)


def test_conditional_expectation_level_one():
    sp = MeasureSpace.lebesgue(10)
    u = GridFunction.from_callable(sp, lambda x: x)
    e = conditional_expectation(u, DyadicAlgebra(1))
    assert np.allclose(e.diffuse_values[:512].real, 0.25)
    assert np.allclose(e.diffuse_values[512:].real, 0.75)


def test_conditional_expectation_keeps_atoms():
    sp = MeasureSpace([("a", 0.5)], np.full(8, 0.5))
    f = GridFunction(sp, [3.0], np.arange(8.0))
    e = conditional_expectation(f, 0)
    assert e.atomic_values[0] == 3
    assert np.allclose(e.diffuse_values, 3.5)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=16, max_size=16), st.integers(0, 4))
def test_conditional_expectation_contracts(vals, level):
    sp = MeasureSpace.lebesgue(4)
    f = GridFunction(sp, [], vals)
    e = conditional_expectation(f, level)
    for p in (1, 2, 4, math.inf):
        assert lp_norm(e, p) <= lp_norm(f, p) + 1e-12
    # idempotent
    ee = conditional_expectation(e, level)
    assert np.allclose(ee.diffuse_values, e.diffuse_values)


def test_halving_split_of_x():
    sp = MeasureSpace.lebesgue(12)
    w = GridFunction.from_callable(sp, lambda x: x)
    hs = halving_split(range(sp.ncells), w)
    # cells are piecewise constant weights, so the split point is close to 1/sqrt(2)
    assert hs.split_point == pytest.approx(1 / math.sqrt(2), abs=1e-3)
    m = sp.cell_masses() * w.diffuse_values.real
    assert np.sum(hs.first * m) == pytest.approx(np.sum(hs.second * m), abs=1e-15)


def test_halving_split_zero_weight():
    sp = MeasureSpace.lebesgue(3)
    hs = halving_split(range(8), GridFunction(sp, [], np.zeros(8)))
    assert hs.degenerate


def test_sign_witness_cancels_on_blocks():
    sp = MeasureSpace.lebesgue(12)
    u = GridFunction.from_callable(sp, lambda x: 1 + np.sin(9 * x))
    for level in (0, 3, 7):
        w = sign_witness(u, Q42, level)
        blocks = (w.g.diffuse_values * w.space.diffuse_masses()).reshape(2**level, -1).sum(axis=1)
        assert np.abs(blocks).max() <= 1e-14
        assert conditional_expectation(w.g, level).diffuse_values == pytest.approx(0, abs=1e-13)


def test_sign_witness_ratio_equals_norm():
    sp = MeasureSpace.lebesgue(10)
    u = GridFunction.from_callable(sp, lambda x: x)
    w = sign_witness(u, Q42, 5)
    ratio = lp_norm(u.on(w.space) * w.g, 2) / lp_norm(w.g, 4)
    assert ratio == pytest.approx(lp_norm(u, 4), rel=1e-12)


def test_sign_witness_infinite_p_orthogonality():
    qi = derive_exponents(math.inf, 2)
    sp = MeasureSpace.lebesgue(8)
    u = GridFunction.from_callable(sp, lambda x: np.exp(2j * x) * (0.5 + x))
    w = sign_witness(u, qi, 4)
    ug = u.on(w.space) * w.g
    assert np.abs(conditional_expectation(ug, 4).diffuse_values).max() <= 1e-14
    assert lp_norm(w.g, math.inf) == pytest.approx(1.0)


def test_sign_witness_degenerate_block():
    sp = MeasureSpace.lebesgue(6)
    u = GridFunction.from_callable(sp, lambda x: np.where(x < 0.5, 0.0, x))
    w = sign_witness(u, Q42, 1)
    assert w.degenerate_blocks == [0]


def test_tail_truncation():
    sp = MeasureSpace([("a", 0.5), ("b", 0.25), ("c", 0.25)], np.ones(4))
    u = GridFunction(sp, [1, 2, 3], np.ones(4))
    t = tail_truncation(u, 2)
    assert list(t.atomic_values.real) == [1, 2, 0]
    assert not np.any(t.diffuse_values)


def test_gridfunction_parse_with_atoms():
    sp = MeasureSpace.parse("atoms: a=0.5; diffuse: m=3")
    u = GridFunction.parse(sp, "x**2; atoms=2")
    assert u.atomic_values[0] == 2
    assert u.diffuse_values[0] == pytest.approx((1 / 16) ** 2)
    with pytest.raises(ValueError):
        GridFunction.parse(sp, "__import__('os')")


def test_sign_witness_on_mixed_space_keeps_atoms():
    sp = MeasureSpace.parse("atoms: a=0.5; diffuse: m=6, density=0.5")
    u = GridFunction.parse(sp, "x; atoms=3")
    w = sign_witness(u, Q42, 2)
    assert w.space.natoms == 1
    assert w.g.atomic_values[0] == 0
