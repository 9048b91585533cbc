"""The ``core`` verification suite: every essential-norm formula and the
constructions behind its lower bounds, each checked against an oracle."""
from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .boundary_maps import (
    BlaschkeProduct,
    TaylorSeries,
    essnorm_composition,
    pushforward_density_blaschke,
    pushforward_density_mc,
)
from .dirichlet import (
    DirichletPolynomial,
    dirichlet_shift_witness,
    essnorm_lower_infty2,
    hp_norm_dirichlet,
)
from .exponents import derive_exponents, holder_identity_check
from .hardy import grid_angles, hp_norm, peaking_sequence, superinner_sup_realize
from .measure_model import GridFunction, MeasureSpace, lp_norm, sign_witness
from .operators import (
    CarlesonMeasure,
    DiscreteMap,
    ProjectionSequence,
    bound_engine_upper,
    dilation_complement_oracle,
    inclusion_essnorm,
    me_cphi_norm,
    multiplier_essnorm,
    multiplier_essnorm_smallp,
    multiplier_tail_norm,
    operator_norm_ascent,
    wco_essnorm,
    weighted_pushforward_lebesgue,
)
from .results import ResultRow

Q42 = derive_exponents(4, 2)


def _row(scenario, theorem, quantity, value, oracle, tol, seed, upper=None, **witness):
    return ResultRow(scenario, theorem, quantity, float(value), float(value if upper is None else upper),
                     None if oracle is None else float(oracle), seed=seed, tol=tol, witness=witness)


def check_exponents(seed):
    rng = np.random.default_rng(seed)
    worst_r = worst_s = 0.0
    for _ in range(200):
        q = rng.uniform(1, 49)
        p = rng.uniform(q + 1e-3, 50)
        e = derive_exponents(p, q)
        assert holder_identity_check(e)
        worst_r = max(worst_r, abs(1 / p + 1 / e.r - 1 / q))
        worst_s = max(worst_s, abs(1 / e.s + q / p - 1))
    return [
        _row("exponents", "exponents", "max |1/p+1/r-1/q|", worst_r, 0.0, 1e-12, seed),
        _row("exponents", "exponents", "max |1/s+q/p-1|", worst_s, 0.0, 1e-12, seed),
    ]


def check_realization(seed):
    rng = np.random.default_rng(seed)
    z = np.exp(1j * grid_angles(1024))
    F = np.abs(1 + z) ** 2
    g, val = superinner_sup_realize(F, Q42)
    rows = [
        _row("outer-realization", "sup-realization", "int F|g|^2 for F=|1+z|^2", val, math.sqrt(6), 1e-6, seed),
        _row("outer-realization", "sup-realization", "||g||_4 for F=|1+z|^2", hp_norm(g, 4), 1.0, 1e-6, seed),
    ]
    err_val = err_norm = 0.0
    for _ in range(20):
        c = (rng.standard_normal(6) + 1j * rng.standard_normal(6)) * 0.4
        F = np.exp(np.real(np.polyval(c, z)))
        g, val = superinner_sup_realize(F, Q42)
        err_val = max(err_val, abs(val - hp_norm(F, 2)))
        err_norm = max(err_norm, abs(hp_norm(g, 4) - 1.0))
    rows.append(_row("outer-realization", "sup-realization", "max |int F|g|^2 - ||F||_2| (20 F)", err_val, 0.0, 1e-6, seed))
    rows.append(_row("outer-realization", "sup-realization", "max | ||g||_4 - 1 | (20 F)", err_norm, 0.0, 1e-6, seed))
    return rows


def check_pushforward(seed):
    rows = []
    mc = pushforward_density_mc(TaylorSeries([0, 0, 0, 1]), samples=10**6, bins=1024, seed=seed)
    rows.append(_row("pushforward", "pushforward-density", "z^3 MC max |F-1|", np.abs(mc.values - 1).max(), 0.0, 0.03, seed))
    an = pushforward_density_blaschke(BlaschkeProduct([0, 0, 0]), 1024)
    rows.append(_row("pushforward", "pushforward-density", "z^3 analytic max |F-1|", np.abs(an.values - 1).max(), 0.0, 1e-9, seed))
    b = BlaschkeProduct([0, 0.5])
    an = pushforward_density_blaschke(b, 1024)
    mc = pushforward_density_mc(b, samples=10**6, bins=1024, seed=seed)
    rows.append(_row("pushforward", "pushforward-density", "Blaschke(0,0.5) MC vs analytic sup", np.abs(mc.values - an.values).max(), 0.0, 0.03, seed))
    rows.append(_row("pushforward", "pushforward-density", "Blaschke(0,0.5) mass", an.mass(), 1.0, 1e-3, seed))
    return rows


def check_composition(seed):
    rows = []
    for label, phi in (("z", TaylorSeries([0, 1])), ("z^2", TaylorSeries([0, 0, 1]))):
        dens = pushforward_density_mc(phi, samples=10**6, bins=1024, seed=seed)
        est = essnorm_composition(dens, Q42)
        rows.append(_row("composition", "composition", f"||C_phi||_e phi={label}", est.lower, 1.0, 0.03, seed, upper=est.upper))
        v = me_cphi_norm(phi, Q42, samples=10**6, seed=seed)
        rows.append(_row("composition", "composition", f"||M_E C_phi|| phi={label}", v, est.lower, 0.03 * est.lower, seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        dens = pushforward_density_mc(TaylorSeries([0.5, 0.5]), samples=10**6, bins=1024, seed=seed)
    est = essnorm_composition(dens, Q42)
    rows.append(_row("composition", "composition", "||C_phi||_e phi=(1+z)/2", est.lower, 0.0, 0.0, seed, upper=est.upper))
    return rows


def check_multiplier(seed):
    sp = MeasureSpace.lebesgue(16)
    u = GridFunction.from_callable(sp, lambda x: x)
    target = 0.2**0.25
    est = multiplier_essnorm(u, Q42)
    w = sign_witness(u, Q42, 8)
    ug = u.on(w.space) * w.g
    ratio = lp_norm(ug, 2) / lp_norm(w.g, 4)
    masses = w.space.diffuse_masses()
    blocks = (w.g.diffuse_values * masses).reshape(2**8, -1).sum(axis=1)
    rows = [
        _row("multiplier", "multiplier", "||M_u||_e u=x m=16", est.lower, target, 1e-6, seed, upper=est.upper),
        _row("multiplier", "multiplier", "sign-witness ratio", ratio, target, 1e-6, seed),
        _row("multiplier", "multiplier", "max |int_C g dmu|", np.abs(blocks).max(), 0.0, 1e-14, seed),
    ]
    atoms = [(f"a{k}", 0.5 * 2.0**-k) for k in range(1, 11)]
    mixed = MeasureSpace(atoms, np.full(2**10, 0.5))
    um = GridFunction.from_callable(mixed, lambda x: x, [1.0 / k for k in range(1, 11)])
    tails = [multiplier_tail_norm(um, Q42, n) for n in range(11)]
    diff = multiplier_essnorm(um, Q42).lower
    monotone = all(a >= b - 1e-15 for a, b in zip(tails, tails[1:]))
    rows.append(_row("multiplier", "multiplier", "tail ||u-u_N||_r at N=all atoms", tails[-1], diff, 1e-12, seed,
                     tails=tails))
    rows.append(_row("multiplier", "multiplier", "tail norms nonincreasing", 0.0 if monotone else 1.0, 0.0, 0.0, seed))
    return rows


def check_smallp(seed):
    q = derive_exponents(2, 4)
    n = 20
    sp = MeasureSpace([(f"a{k}", 2.0**-k) for k in range(1, n + 1)])
    u = GridFunction(sp, 2.0 ** (-np.arange(1, n + 1) / 4), np.zeros(0))
    est = multiplier_essnorm_smallp(u, q)
    tails = est.notes["tail_norms"]
    worst = 0.0
    for k in range(n):
        m = sp.atom_masses[k:]
        asc = operator_norm_ascent(np.diag(np.abs(u.atomic_values[k:])), q, domain_weights=m, range_weights=m)
        worst = max(worst, abs(asc.value - tails[k]))
    return [
        _row("small-p", "multiplier-small-p", "formula value", est.lower, 1.0, 1e-12, seed, upper=est.upper),
        _row("small-p", "multiplier-small-p", "max |ascent - tail sup|", worst, 0.0, 1e-6, seed),
    ]


def check_dirichlet(seed):
    D = DirichletPolynomial.parse("1:1, 2:2, 3:1")
    lift = hp_norm_dirichlet(D, 4, grid=256)
    erg = hp_norm_dirichlet(D, 4, method="ergodic", T=1e5, step=0.01)
    _, ratio = dirichlet_shift_witness(D, Q42, 256, grid=256)
    return [
        _row("dirichlet", "dirichlet-multiplier", "||D||_4 lift (256^2)", lift, erg, 0.01 * lift, seed),
        _row("dirichlet", "dirichlet-multiplier", "witness ratio / ||D||_4", ratio / lift, 1.0, 0.05, seed),
    ]


def check_fact(seed):
    z = np.exp(1j * grid_angles(1024))
    F = np.abs((1 + z) / 2) ** 0.1
    ps = peaking_sequence(F, 0.1, 3)
    iu = np.triu_indices(3, 1)
    inside = float(ps.report.inside[iu].min())
    outside = float(ps.report.outside[iu].max())
    return [
        _row("peaking", "peaking-fact", "min int_A |R_n-R_m| - 1/8", max(0.0, 0.125 - inside), 0.0, 0.0, seed, inside=inside),
        _row("peaking", "peaking-fact", "max int_(T\\A) |R_n-R_m| vs 4eps", max(0.0, outside - 0.4), 0.0, 0.0, seed, outside=outside),
    ]


def check_infty2(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        L = int(rng.integers(1, 40))
        D = DirichletPolynomial(rng.standard_normal(L) + 1j * rng.standard_normal(L))
        N = int(rng.integers(0, 200))
        worst = max(worst, abs(essnorm_lower_infty2(D, N) - D.norm2()))
    return [_row("infty-2", "dirichlet-lower", "max |lower - Parseval| (50 D)", worst, 0.0, 1e-12, seed)]


def check_inclusion(seed):
    pts = [(0.4 * np.exp(2j * np.pi * k / 5) * (0.5 + 0.1 * k), 0.2) for k in range(5)]
    mu = CarlesonMeasure(pts)
    est = inclusion_essnorm(mu, Q42)
    up = bound_engine_upper(dilation_complement_oracle(mu, Q42), ProjectionSequence("dilation", [1, 10, 100, 1000]))
    z = np.exp(1j * grid_angles(1024))
    est2 = inclusion_essnorm(CarlesonMeasure([], np.abs(1 + z) ** 2), Q42)
    return [
        _row("inclusion", "inclusion", "interior-only essential norm", est.lower, 0.0, 0.0, seed, upper=est.upper),
        _row("inclusion", "inclusion", "dilation upper bound at n=1000", up, 0.0, 1e-2, seed),
        _row("inclusion", "inclusion", "F=|1+z|^2 essential norm", est2.lower, 6**0.25, 1e-6, seed, upper=est2.upper),
    ]


def check_wco(seed):
    sp = MeasureSpace.lebesgue(10)
    phi = DiscreteMap(sp, sp, lambda x: np.mod(2 * x, 1.0))
    u = GridFunction.from_callable(sp, lambda x: np.ones_like(x))
    wp = weighted_pushforward_lebesgue(phi, u, 2)
    est = wco_essnorm(phi, u, Q42)
    rng = np.random.default_rng(seed)
    gap = max(wp.isometry_gap(GridFunction(sp, np.zeros(0), rng.standard_normal(sp.ncells)), u) for _ in range(20))
    # the doubling map preserves Lebesgue measure, so the density is 1
    Fdev = float(np.abs(wp.F.diffuse_values - 1).max())
    return [
        _row("weighted-comp", "weighted-composition", "doubling map max |F-1|", Fdev, 0.0, 1e-12, seed),
        _row("weighted-comp", "weighted-composition", "doubling map essential norm", est.lower, 1.0, 1e-9, seed, upper=est.upper),
        _row("weighted-comp", "weighted-composition", "isometry gap (20 random f)", gap, 0.0, 1e-9, seed),
    ]


SUITES = {
    "core": (
        check_exponents,
        check_realization,
        check_pushforward,
        check_composition,
        check_multiplier,
        check_smallp,
        check_dirichlet,
        check_fact,
        check_infty2,
        check_inclusion,
        check_wco,
    )
}


def _timed(check, seed):
    t0 = time.perf_counter()
    rows = check(seed)
    ms = (time.perf_counter() - t0) * 1000.0
    for r in rows:
        r.runtime_ms = ms / len(rows)
        r.finalize()
    return rows


def run_suite(name: str = "core", seed: int = 0, jobs: int = 1) -> list:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    checks = SUITES[name]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_timed, checks, [seed] * len(checks)))
    else:
        parts = [_timed(c, seed) for c in checks]
    return [r for part in parts for r in part]
