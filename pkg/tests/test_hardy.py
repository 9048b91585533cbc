import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from essnorm.exponents import derive_exponents
from essnorm.hardy import (
    FrequencyPolynomial,
    analytic_residual,
    analytic_shift_witness,
    fejer_approx,
    grid_angles,
    grid_coefficients,
    holder_extremizer,
    hp_norm,
    outer_with_modulus,
    parse_circle_function,
    peaking_sequence,
    resample,
    superinner_sup_realize,
)

Q42 = derive_exponents(4, 2)
Z = np.exp(1j * grid_angles(1024))


def test_hp_norm_of_one_plus_z():
    # |1+z|^4 = (2 + 2cos)^2 has mean 6
    assert hp_norm(1 + Z, 4) == pytest.approx(6**0.25, abs=1e-14)
    assert hp_norm(1 + Z, 2) == pytest.approx(math.sqrt(2))
    assert hp_norm(1 + Z, math.inf) == pytest.approx(2)


def test_polynomial_parseval_matches_grid():
    P = FrequencyPolynomial.from_dict({0: 1, 1: 2j, 3: -1})
    assert P.norm2() == pytest.approx(math.sqrt(6))
    assert hp_norm(P.evaluate_grid(64), 2) == pytest.approx(math.sqrt(6))
    assert P.is_analytic()
    assert not P.shift((-1,)).is_analytic()


def test_polynomial_call_matches_grid():
    P = FrequencyPolynomial.from_dict({(0, 1): 1, (2, 0): 0.5, (-1, 1): 1j})
    vals = P.evaluate_grid(8)
    th = grid_angles(8)
    assert vals[3, 5] == pytest.approx(P(th[3], th[5]))


def test_grid_coefficients_roundtrip():
    rng = np.random.default_rng(0)
    f = rng.standard_normal((16, 16))
    c = grid_coefficients(f)
    assert np.allclose(c.evaluate_grid(16), f)


def test_resample_is_exact_for_band_limited():
    f = 1 + Z[::16] ** 3  # 64 points
    g = resample(f, 1024)
    assert np.abs(g - (1 + Z**3)).max() < 1e-12


def test_outer_of_outer_polynomial():
    # 2 + z has no zeros in the closed disc, so it is outer up to a constant
    g = outer_with_modulus(np.abs(2 + Z))
    c = g[0] / (2 + Z[0])
    assert abs(c) == pytest.approx(1, abs=1e-12)
    assert np.abs(g - c * (2 + Z)).max() < 1e-12
    assert analytic_residual(g) < 1e-24


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4))
def test_outer_has_prescribed_modulus(c):
    G = np.exp(np.real(np.polyval(c, Z)))
    g = outer_with_modulus(G)
    assert np.abs(np.abs(g) - G).max() < 1e-12
    assert analytic_residual(g) < 1e-20


def test_holder_extremizer():
    F = np.abs(1 + Z) ** 2
    G, val = holder_extremizer(F, 2)
    assert hp_norm(G, 2) == pytest.approx(1)
    assert val == pytest.approx(math.sqrt(6))
    G0, v0 = holder_extremizer(np.zeros(8), 3)
    assert v0 == 0 and np.all(G0 == 1)
    with pytest.raises(ValueError):
        holder_extremizer(-F, 2)


def test_superinner_sup_realize_closed_case():
    g, val = superinner_sup_realize(np.abs(1 + Z) ** 2, Q42)
    assert hp_norm(g, 4) == pytest.approx(1, abs=1e-6)
    assert val == pytest.approx(math.sqrt(6), abs=1e-6)


def test_superinner_infinite_p():
    q = derive_exponents(math.inf, 2)
    F = 1 + 0.5 * np.cos(grid_angles(256))
    g, val = superinner_sup_realize(F, q)
    assert np.allclose(g, 1)
    assert val == pytest.approx(1)


def test_fejer_preserves_bounds():
    h = (grid_angles(512) < 1.0).astype(float)
    Q = np.real(fejer_approx(h, 100).evaluate_grid(512))
    assert Q.min() >= -1e-12
    assert Q.max() <= 1 + 1e-12
    with pytest.raises(ValueError):
        fejer_approx(h, 256)


def test_fejer_two_dimensional():
    f = np.ones((32, 32))
    f[:4, :4] = 5
    Q = np.real(fejer_approx(f, 15).evaluate_grid(32))
    assert Q.min() >= 1 - 1e-12 and Q.max() <= 5 + 1e-12
    assert Q.mean() == pytest.approx(f.mean())


def test_shift_witness_independent_of_shift_and_converges():
    F = 2 + Z[::8]
    r_true = hp_norm(2 + Z, 4)
    E1, r1 = analytic_shift_witness(F, Q42, 64, 1)
    E2, r2 = analytic_shift_witness(F, Q42, 64, 50)
    assert r1 == pytest.approx(r2, abs=1e-12)
    assert E1.is_analytic() and E2.is_analytic()
    ratios = [analytic_shift_witness(F, Q42, n)[1] for n in (8, 32, 128)]
    assert ratios[0] < ratios[1] < ratios[2] <= r_true + 1e-12
    assert ratios[2] > 0.999 * r_true


def test_peaking_constant_function():
    ps = peaking_sequence(np.ones(256), 0.1, 3)
    assert ps.report.passed
    assert ps.masses[0] == 1.0
    assert ps.masses[1] <= ps.masses[0] / 4 and ps.masses[2] <= ps.masses[1] / 4


def test_peaking_bounds():
    F = np.abs((1 + Z) / 2) ** 0.1
    ps = peaking_sequence(F, 0.1, 3)
    assert ps.report.passed
    assert np.all(ps.report.l1_norms <= 1 + 1e-12)
    assert np.all(ps.report.peak_ratio <= 1 + 1e-12)
    assert ps.notes["min_Q"] >= -1e-12
    # nested inside the superlevel set
    for a, b in zip(ps.sets, ps.sets[1:]):
        assert not np.any(b & ~a)


def test_peaking_rejects_bad_eps():
    with pytest.raises(ValueError):
        peaking_sequence(np.ones(64), 0.3, 2)


def test_parse_circle_function(tmp_path):
    assert np.allclose(parse_circle_function("const 2", 8), 2)
    assert np.allclose(parse_circle_function("poly: 1, 1", 1024), 1 + Z)
    assert np.allclose(parse_circle_function("abs-of-poly: 1,1; power=2", 1024), np.abs(1 + Z) ** 2)
    p = tmp_path / "f.csv"
    p.write_text(",".join(["1"] * 16))
    assert np.allclose(parse_circle_function(f"csv:{p}", 16), 1)
    with pytest.raises(ValueError):
        parse_circle_function("spline: 1", 8)
