import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from essnorm.boundary_maps import (
    BlaschkeProduct,
    Composition,
    TaylorSeries,
    blaschke_density_at,
    boundary_speed_blaschke,
    boundary_trace,
    contact_integral,
    essnorm_composition,
    lifted_angle,
    parse_map,
    pushforward_density,
    pushforward_density_blaschke,
    pushforward_density_mc,
)
from essnorm.exponents import derive_exponents

Q42 = derive_exponents(4, 2)


def poisson_bin_averages(w, bins):
    edges = 2 * np.pi * np.arange(bins + 1) / bins
    z = np.exp(1j * edges)
    ang = np.unwrap(np.angle((z - w) / (1 - np.conj(w) * z)))
    return np.diff(ang) * bins / (2 * np.pi)


def test_parse_map_kinds():
    b = parse_map("blaschke: 0, 0.5; rot=1i")
    assert isinstance(b, BlaschkeProduct) and b.degree == 2
    t = parse_map("taylor: 0.5, 0.5; tail=1e-9")
    assert isinstance(t, TaylorSeries) and t.tail_bound == 1e-9
    c = parse_map("compose: taylor: 0,0,1 | blaschke: 0.5")
    assert isinstance(c, Composition)
    z = 0.3 + 0.1j
    assert c(z) == pytest.approx(BlaschkeProduct([0.5])(z) ** 2)
    with pytest.raises(ValueError):
        parse_map("mobius: 1")
    with pytest.raises(ValueError):
        BlaschkeProduct([1.0])


def test_self_map_check():
    assert TaylorSeries([0.5, 0.5]).check_self_map()[1]
    assert not TaylorSeries([0.5, 0.7]).check_self_map()[1]


def test_trace_of_monomial():
    th = np.linspace(0, 6, 7)
    tr = boundary_trace(TaylorSeries([0, 0, 0, 1]), th)
    assert np.allclose(tr.value, np.exp(3j * th), atol=1e-12)
    assert tr.converged.all()


def test_trace_closed_forms():
    assert abs(boundary_trace(TaylorSeries([0.5, 0.5]), math.pi).value) < 1e-12
    b = BlaschkeProduct([0.5])
    assert boundary_trace(b, 0.0).value == pytest.approx(1.0)
    xi = np.exp(2j)
    assert boundary_trace(b, 2.0).value == pytest.approx((xi - 0.5) / (1 - 0.5 * xi), abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=0.95), min_size=1, max_size=4))
def test_speed_integrates_to_degree(zeros):
    b = BlaschkeProduct(zeros)
    th = 2 * np.pi * np.arange(4096) / 4096
    sp = boundary_speed_blaschke(b, th)
    assert np.all(sp > 0)
    assert sp.mean() == pytest.approx(b.degree, rel=1e-3)
    # the lifted angle increases by 2 pi k over one turn
    tau = lifted_angle(b, np.array([0.0, 2 * np.pi]))
    assert tau[1] - tau[0] == pytest.approx(2 * np.pi * b.degree)


def test_density_single_zero_at_one():
    assert blaschke_density_at(BlaschkeProduct([0.5]), 0.0) == pytest.approx(1 / 3)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=0.9), min_size=1, max_size=3))
def test_analytic_density_is_poisson_kernel(zeros):
    # the boundary image of an inner function is harmonic measure at b(0)
    b = BlaschkeProduct(zeros)
    d = pushforward_density_blaschke(b, 256)
    assert np.allclose(d.values, poisson_bin_averages(complex(b(0.0)), 256), atol=1e-8, rtol=1e-8)
    assert d.mass() == pytest.approx(1, abs=1e-12)


def test_monomial_density_is_one():
    d = pushforward_density_blaschke(BlaschkeProduct([0, 0]), 1024)
    assert np.abs(d.values - 1).max() <= 1e-9


def test_mc_density_z_squared():
    d = pushforward_density_mc(TaylorSeries([0, 0, 1]), samples=10**6, bins=1024, seed=3)
    assert np.abs(d.values - 1).max() <= 0.03
    assert d.contact.measure == pytest.approx(1)


def test_mc_matches_analytic_for_blaschke():
    b = BlaschkeProduct([0.5, -0.3j])
    mc = pushforward_density_mc(b, samples=10**6, bins=512, seed=1)
    an = pushforward_density_blaschke(b, 512)
    assert np.abs(mc.values - an.values).max() <= 0.03 * an.values.max()


def test_mc_is_deterministic():
    a = pushforward_density_mc(TaylorSeries([0, 1]), samples=10**5, bins=64, seed=5)
    b = pushforward_density_mc(TaylorSeries([0, 1]), samples=10**5, bins=64, seed=5)
    assert np.array_equal(a.values, b.values)


def test_iid_sampling_available():
    d = pushforward_density_mc(TaylorSeries([0, 1]), samples=10**5, bins=16, seed=0, sampling="iid")
    assert d.mass() == pytest.approx(1)
    assert np.abs(d.values - 1).max() < 0.05


def test_compact_symbol_has_null_contact():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        d = pushforward_density_mc(TaylorSeries([0.5, 0.5]), samples=10**5, bins=64)
    assert d.contact.null
    assert not np.any(d.values)
    assert any(issubclass(x.category, RuntimeWarning) for x in w)
    assert essnorm_composition(d, Q42).upper == 0


def test_dispatch():
    assert pushforward_density(BlaschkeProduct([0.2]), 64).provenance["kind"] == "analytic"
    assert pushforward_density(TaylorSeries([0, 1]), 64, samples=10**4).provenance["kind"] == "monte_carlo"


def test_composition_bracket():
    d = pushforward_density_blaschke(BlaschkeProduct([0.5]), 512)
    e = essnorm_composition(d, Q42)
    assert e.exact
    w = derive_exponents(6, 3)
    e3 = essnorm_composition(d, w)
    assert e3.upper == pytest.approx(2 * e3.lower)
    with pytest.raises(ValueError):
        essnorm_composition(d, derive_exponents(2, 4))


def test_contact_integral_change_of_variables():
    b = BlaschkeProduct([0.5, -0.3j])
    lhs, frac = contact_integral(b, lambda w: np.abs(1 + w) ** 2, samples=10**5, seed=2)
    an = pushforward_density_blaschke(b, 2048)
    rhs = np.mean(np.abs(1 + np.exp(1j * an.centers())) ** 2 * an.values)
    assert frac == 1.0
    assert lhs == pytest.approx(rhs, rel=1e-3)
