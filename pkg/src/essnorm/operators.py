"""Multipliers, inclusions and weighted compositions between Lebesgue and
Hardy spaces: exact norms, essential-norm formulas and the finite bound
engines used to cross-check them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from .boundary_maps import (
    AnalyticSelfMap,
    PushforwardDensity,
    contact_integral,
    pushforward_density,
)
from .bounds import BoundEstimate
from .exponents import ExponentQuad, conjugate
from .hardy import resample, superinner_sup_realize
from .measure_model import (
    GridFunction,
    MeasureSpace,
    conditional_expectation,
    lp_norm,
    sign_witness,
    tail_truncation,
)

# -- projection sequences ---------------------------------------------------------

_KINDS = {
    # kind: (bound on ||Q_n||, bound on ||I - Q_n||)
    "dilation": (1.0, 2.0),
    "coefficient_truncation": (1.0, 1.0),  # on H^2; orthogonal projection
    "conditional_expectation": (1.0, 2.0),
    "atom_truncation": (1.0, 1.0),
}


@dataclass
class ProjectionSequence:
    kind: str
    indices: Sequence[int]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown projection kind {self.kind!r}")
        self.indices = list(self.indices)
        if not self.indices:
            raise ValueError("empty index window")

    @property
    def norm_bound(self) -> float:
        return _KINDS[self.kind][0]

    @property
    def complement_bound(self) -> float:
        return _KINDS[self.kind][1]

    def apply(self, f: GridFunction, n: int) -> GridFunction:
        if self.kind == "conditional_expectation":
            return conditional_expectation(f, n)
        if self.kind == "atom_truncation":
            return tail_truncation(f, n)
        raise ValueError(f"{self.kind} does not act on measure-space grid functions")

    def complement(self, f: GridFunction, n: int) -> GridFunction:
        return f - self.apply(f, n)


def bound_engine_lower(oracle: Callable[[int], float], R: ProjectionSequence, lam: float) -> float:
    """``max_n ||R_n T|| / lam`` over the window: lower bound for ``||T||_e``
    when ``R_n -> 0`` pointwise and ``||R_n|| <= lam``."""
    if lam <= 0:
        raise ValueError("lam must be > 0")
    return max(float(oracle(n)) for n in R.indices) / lam


def bound_engine_upper(oracle: Callable[[int], float], Q: ProjectionSequence) -> float:
    """``min_n ||T (I - Q_n)||`` over the window: upper bound for ``||T||_e``
    when every ``Q_n`` is compact."""
    return min(float(oracle(n)) for n in Q.indices)


# -- multipliers on L^p(mu) ---------------------------------------------------------


def multiplier_norm_exact(u: GridFunction, quad: ExponentQuad, space: Optional[MeasureSpace] = None) -> float:
    """``||M_u: L^p -> L^q|| = ||u||_r`` for ``p > q``."""
    if space is not None and space is not u.space:
        u = u.on(space)
    if quad.p <= quad.q:
        raise ValueError("needs p > q")
    return lp_norm(u, quad.r)


def multiplier_tail_norm(u: GridFunction, quad: ExponentQuad, n: int) -> float:
    """``||M_u - M_{u_n}|| = ||u - u_n||_r`` with ``u_n`` the first ``n`` atoms of ``u``."""
    return lp_norm(u - tail_truncation(u, n), quad.r)


def multiplier_essnorm(u: GridFunction, quad: ExponentQuad, space: Optional[MeasureSpace] = None) -> BoundEstimate:
    """Essential norm of ``M_u: L^p -> L^q`` from the diffuse part of ``u``."""
    if space is not None and space is not u.space:
        u = u.on(space)
    if quad.p <= quad.q:
        raise ValueError("needs p > q; use multiplier_essnorm_smallp for p < q")
    ud = u.diffuse_part()
    if quad.p_finite:
        v = lp_norm(ud, quad.r)
        return BoundEstimate(v, v, "multiplier: ||u 1_diffuse||_r")
    v = lp_norm(ud, quad.q)
    if quad.q == 2:
        return BoundEstimate(v, v, "multiplier p=inf, q=2: ||u 1_diffuse||_2")
    return BoundEstimate(0.5 * v, v, "multiplier p=inf: [1/2, 1] * ||u 1_diffuse||_q")


def multiplier_essnorm_smallp(
    u: GridFunction, quad: ExponentQuad, window: Optional[tuple] = None
) -> BoundEstimate:
    """``p < q`` on a purely atomic part: the tail sup of ``|u_k| mu_k^{1/q - 1/p}``.

    ``window = (start, stop)`` is the index range standing in for the limsup
    (default: the second half of the atoms).  The per-index tail norms
    ``||T_n|| = max_{k >= n} |u_k| mu_k^{1/q - 1/p}`` are in ``notes``.
    """
    if quad.p >= quad.q:
        raise ValueError("needs p < q")
    if np.any(np.abs(u.diffuse_values) > 0):
        raise ValueError("u must vanish on the diffuse part")
    sp = u.space
    n = sp.natoms
    if n == 0:
        return BoundEstimate(0.0, 0.0, "multiplier p<q: no atoms")
    a = np.abs(u.atomic_values) * sp.atom_masses**quad.inv_r
    tails = np.maximum.accumulate(a[::-1])[::-1]
    start, stop = window if window is not None else (n // 2, n)
    if not 0 <= start < stop <= n:
        raise ValueError(f"window {window} outside 0..{n}")
    v = float(a[start:stop].max())
    return BoundEstimate(
        v, v, "multiplier p<q: tail sup |u_k| mu_k^(1/q-1/p)", notes={"tail_norms": tails, "window": (start, stop)}
    )


def witness_ratio_oracle(u: GridFunction, quad: ExponentQuad) -> Callable[[int], float]:
    """``n -> ||(I - E_n)(u g_n)||_q / ||g_n||_p`` with ``g_n`` the sign witness."""

    def oracle(n: int) -> float:
        w = sign_witness(u, quad, n)
        g = w.g
        ug = u.on(g.space) * g
        num = lp_norm(ug - conditional_expectation(ug, n), quad.q)
        den = lp_norm(g, quad.p)
        return num / den if den > 0 else 0.0

    return oracle


# -- Carleson measures and inclusions ----------------------------------------------


@dataclass
class CarlesonMeasure:
    """Finitely many interior point masses plus a boundary density on the circle grid."""

    interior: list = field(default_factory=list)
    boundary_density: Optional[np.ndarray] = None

    def __post_init__(self):
        self.interior = [(complex(z), float(m)) for z, m in self.interior]
        for z, m in self.interior:
            if abs(z) >= 1 or m <= 0:
                raise ValueError(f"interior point {z} needs |z| < 1 and mass > 0")
        if self.boundary_density is not None:
            F = np.asarray(self.boundary_density, dtype=np.float64)
            if np.any(F < 0):
                raise ValueError("boundary density must be nonnegative")
            self.boundary_density = F

    @property
    def points(self) -> np.ndarray:
        return np.array([z for z, _ in self.interior], dtype=np.complex128)

    @property
    def masses(self) -> np.ndarray:
        return np.array([m for _, m in self.interior], dtype=np.float64)


def carleson_hat(mu: CarlesonMeasure, theta) -> np.ndarray:
    """``sum m/(1-|z|^2)`` over interior points with ``|1 - z conj(xi)| < 1 - |z|^2``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if not mu.interior:
        return np.zeros(theta.shape)
    return _kernels.carleson_hat_grid(mu.points, mu.masses, theta)


def inclusion_essnorm(mu: CarlesonMeasure, quad: ExponentQuad) -> BoundEstimate:
    """Essential norm of ``H^p -> L^q(mu)``: ``||F||_s^{1/q}``; interior mass is compact."""
    if quad.p <= quad.q:
        raise ValueError("needs p > q")
    F = mu.boundary_density
    if F is None or F.size == 0:
        return BoundEstimate(0.0, 0.0, "inclusion: interior only")
    v = float(np.mean(F**quad.s)) ** (1.0 / quad.s) if quad.p_finite else float(np.mean(F))
    v = v ** (1.0 / quad.q)
    return BoundEstimate(v, v, "inclusion: ||F||_s^(1/q)")


def interior_tail_oracle(mu: CarlesonMeasure, quad: ExponentQuad) -> Callable[[int], float]:
    """Upper bound for the inclusion restricted to all but the ``n`` innermost points.

    Uses ``|f(z)| <= ||f||_p (1-|z|^2)^{-1/p}``; reaches 0 once every point
    is dropped, matching compactness of the interior part.
    """
    order = np.argsort(np.abs(mu.points), kind="stable")
    z = mu.points[order]
    m = mu.masses[order]
    terms = m * (1.0 - np.abs(z) ** 2) ** (-quad.q / quad.p)

    def oracle(n: int) -> float:
        return float(np.sum(terms[n:])) ** (1.0 / quad.q)

    return oracle


def dilation_complement_oracle(mu: CarlesonMeasure, quad: ExponentQuad) -> Callable[[int], float]:
    """Upper bound for ``||J_mu (I - Q_n)||`` with ``Q_n f = f((1 - 1/n) .)`` on interior masses.

    ``|f(z) - f(rho z)| <= (1 - rho)|z| sup |f'|`` and the Cauchy estimate on
    a disc of radius ``(1-|z|)/2`` give
    ``|f'(w)| <= 2 (1-|w|)^{-1} ((1-|w|)/2)^{-1/p} ||f||_p``, increasing in ``|w|``.
    """
    z = np.abs(mu.points)
    m = mu.masses
    d = 1.0 - z
    lip = z * 2.0 / d * (d / 2.0) ** (-1.0 / quad.p)

    def oracle(n: int) -> float:
        if n < 1:
            raise ValueError("dilation index starts at 1")
        return float(np.sum(m * (lip / n) ** quad.q)) ** (1.0 / quad.q)

    return oracle


def _periodic_interp(values: np.ndarray, theta: np.ndarray, offset: float = 0.0) -> np.ndarray:
    """Linear interpolation of samples at ``2 pi (j + offset)/M``."""
    m = values.size
    x = np.mod(theta * m / (2 * np.pi) - offset, m)
    j = np.floor(x).astype(np.int64) % m
    w = x - np.floor(x)
    return values[j] * (1 - w) + values[(j + 1) % m] * w


def _density(phi, bins, samples, seed) -> PushforwardDensity:
    return pushforward_density(phi, bins=bins, samples=samples, seed=seed)


def change_of_variables_check(
    phi: AnalyticSelfMap, f: Callable, q: float, samples: int = 10**6, seed: int = 0, bins: int = 1024
) -> tuple[float, float, float]:
    """Compare ``∫_E |f(phi*)|^q dσ`` (Monte Carlo) with ``∫ |f|^q F_phi dσ`` (quadrature).

    ``f`` takes unimodular complex points.  Returns ``(lhs, rhs, relative gap)``.
    """
    lhs, _ = contact_integral(phi, lambda w: np.abs(f(w)) ** q, samples=samples, seed=seed)
    dens = _density(phi, bins, samples, seed + 1)
    w = np.exp(1j * dens.centers())
    rhs = float(np.mean(np.abs(f(w)) ** q * dens.values))
    gap = abs(lhs - rhs) / max(abs(rhs), 1e-300) if rhs != 0 else abs(lhs)
    return lhs, rhs, gap


@dataclass
class RealizedNorm:
    value: float  # (∫_E |g∘phi*|^q)^{1/q}, Monte Carlo
    target: float  # ||F_phi||_s^{1/q}
    gap: float


def me_cphi_norm(
    phi: AnalyticSelfMap,
    quad: ExponentQuad,
    bins: int = 1024,
    samples: int = 10**6,
    seed: int = 0,
    tol: Optional[float] = None,
    details: bool = False,
):
    """``||M_E C_phi||_{p->q}`` realized by the extremal analytic ``g`` for ``F_phi``.

    ``g`` is built on the bin centers of ``F_phi``; ``∫_E |g(phi*)|^q`` is
    estimated by Monte Carlo with ``g`` interpolated from a 16x refined grid.
    With ``tol`` set, a relative gap above it raises.
    """
    if quad.p <= quad.q:
        raise ValueError("needs p > q")
    dens = _density(phi, bins, samples, seed + 1)
    target = dens.norm(quad.s) ** (1.0 / quad.q) if quad.p_finite else dens.mass() ** (1.0 / quad.q)
    if target == 0:
        res = RealizedNorm(0.0, 0.0, 0.0)
        return res if details else res.value
    g, _ = superinner_sup_realize(dens.values, quad)
    fine = resample(g, 16 * bins)
    mod_q = np.abs(fine) ** quad.q

    # g[j] sits at bin center 2 pi (j + 1/2)/bins, i.e. fine index 16 j + 8
    def integrand(w):
        return _periodic_interp(mod_q, np.mod(np.angle(w), 2 * np.pi), offset=8.0)

    integral, _ = contact_integral(phi, integrand, samples=samples, seed=seed)
    value = integral ** (1.0 / quad.q)
    gap = abs(value - target) / target
    if tol is not None and gap > tol:
        raise ArithmeticError(f"realized norm {value:.6g} misses ||F||_s^(1/q) = {target:.6g} by {gap:.2%}")
    res = RealizedNorm(value, target, gap)
    return res if details else res.value


# -- weighted composition on Lebesgue spaces ---------------------------------------


@dataclass
class DiscreteMap:
    """Measurable map from ``source`` to ``target`` on the grid model.

    ``diffuse`` sends points of [0,1) to [0,1) (vectorized); ``atoms`` maps
    source atom labels to target atom labels.  Each source cell is sampled
    at ``refine`` equally spaced sub-points carrying equal mass.
    """

    source: MeasureSpace
    target: MeasureSpace
    diffuse: Optional[Callable] = None
    atoms: dict = field(default_factory=dict)
    refine: int = 16


@dataclass
class WeightedPushforward:
    F: GridFunction  # on the target
    cell_index: np.ndarray  # target cell of each source sub-point
    sub_mass: np.ndarray
    sub_weight: np.ndarray  # |u|^q at each source sub-point
    atom_index: np.ndarray  # target atom of each source atom
    q: float

    def isometry_gap(self, f: GridFunction, u: GridFunction) -> float:
        """``| ||u (f∘phi)||_q - ||F f||_q |`` for ``f`` on the target."""
        fd = np.abs(f.diffuse_values)[self.cell_index] if self.cell_index.size else np.zeros(0)
        fa = np.abs(f.atomic_values)[self.atom_index] if self.atom_index.size else np.zeros(0)
        ua = np.abs(u.atomic_values) ** self.q
        lhs = np.sum(self.sub_weight * self.sub_mass * fd**self.q) + np.sum(ua * u.space.atom_masses * fa**self.q)
        lhs = float(lhs) ** (1.0 / self.q)
        rhs = lp_norm(self.F * f, self.q)
        return abs(lhs - rhs)


def weighted_pushforward_lebesgue(phi: DiscreteMap, u: GridFunction, q: float) -> WeightedPushforward:
    """``F = (d mu_q / d mu)^{1/q}`` with ``mu_q(A) = ∫_{phi^{-1}(A)} |u|^q d nu``, by exact binning."""
    src, tgt = phi.source, phi.target
    if u.space is not src:
        u = u.on(src)
    if src.split or tgt.split:
        raise ValueError("split spaces are not supported here")
    acc_cells = np.zeros(tgt.ncells)
    acc_atoms = np.zeros(tgt.natoms)
    cell_index = np.zeros(0, dtype=np.int64)
    sub_mass = np.zeros(0)
    sub_weight = np.zeros(0)
    if src.ncells:
        if phi.diffuse is None:
            if src.diffuse_mass > 0:
                raise ValueError("source has a diffuse part but the map has no diffuse branch")
        else:
            if tgt.ncells == 0:
                raise ValueError("diffuse branch needs a diffuse target")
            k = phi.refine
            x = ((np.arange(src.ncells)[:, None] + (np.arange(k)[None, :] + 0.5) / k) / src.ncells).ravel()
            y = np.asarray(phi.diffuse(x), dtype=np.float64)
            if np.any((y < 0) | (y >= 1)) or not np.all(np.isfinite(y)):
                raise ValueError("diffuse branch must map into [0, 1)")
            cell_index = np.minimum((y * tgt.ncells).astype(np.int64), tgt.ncells - 1)
            sub_mass = np.repeat(src.diffuse_masses() / k, k)
            sub_weight = np.repeat(np.abs(u.diffuse_values) ** q, k)
            acc_cells = np.bincount(cell_index, weights=sub_mass * sub_weight, minlength=tgt.ncells)
    atom_index = np.zeros(src.natoms, dtype=np.int64)
    lookup = {lab: i for i, lab in enumerate(tgt.atom_labels)}
    for i, lab in enumerate(src.atom_labels):
        if lab not in phi.atoms:
            raise ValueError(f"source atom {lab!r} has no image")
        b = phi.atoms[lab]
        if b not in lookup:
            raise ValueError(f"image {b!r} of atom {lab!r} is not a target atom")
        atom_index[i] = lookup[b]
        acc_atoms[lookup[b]] += abs(u.atomic_values[i]) ** q * src.atom_masses[i]
    # nonsingularity: no positive mass into null target cells
    tm = tgt.diffuse_masses() if tgt.ncells else np.zeros(0)
    if tgt.ncells:
        mass_in = np.bincount(cell_index, weights=sub_mass, minlength=tgt.ncells) if cell_index.size else tm * 0
        bad = np.flatnonzero((tm <= 0) & (mass_in > 0))
        if bad.size:
            raise ValueError(f"map is singular: positive mass lands in null target cells {bad[:10].tolist()}")
    with np.errstate(divide="ignore", invalid="ignore"):
        Fd = np.where(tm > 0, acc_cells / np.where(tm > 0, tm, 1.0), 0.0) ** (1.0 / q)
    Fa = (acc_atoms / tgt.atom_masses) ** (1.0 / q) if tgt.natoms else np.zeros(0)
    F = GridFunction(tgt, Fa, Fd)
    return WeightedPushforward(F, cell_index, sub_mass, sub_weight, atom_index, q)


def wco_essnorm(phi: DiscreteMap, u: GridFunction, quad: ExponentQuad) -> BoundEstimate:
    """Essential norm of ``u C_phi``: ``||F_{q,u,phi} 1_diffuse||_r``."""
    if quad.p <= quad.q:
        raise ValueError("needs p > q")
    wp = weighted_pushforward_lebesgue(phi, u, quad.q)
    v = lp_norm(wp.F.diffuse_part(), quad.r)
    return BoundEstimate(v, v, "weighted composition: ||F_{q,u,phi} 1_diffuse||_r", witness=wp)


# -- finite-dimensional p -> q norms ------------------------------------------------


@dataclass
class AscentResult:
    value: float
    x: np.ndarray
    history: list  # per start: list of successive ratios
    converged: bool


def _dual(y: np.ndarray, q: float) -> np.ndarray:
    """Duality image: ``|y|^{q-1} sgn(y)`` (``sgn`` for ``q = 1``)."""
    a = np.abs(y)
    sgn = np.where(a > 0, y / np.where(a > 0, a, 1.0), 0.0)
    if q == 1:
        return sgn
    return a ** (q - 1.0) * sgn


def _pnorm(x: np.ndarray, p: float) -> float:
    a = np.abs(x)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float(np.sum(a**p)) ** (1.0 / p)


def operator_norm_ascent(
    kernel,
    quad: ExponentQuad,
    starts: Optional[Sequence] = None,
    domain_weights=None,
    range_weights=None,
    iters: int = 500,
    tol: float = 1e-13,
    seed: int = 0,
    nbasis: int = 8,
) -> AscentResult:
    """Lower bound for ``||K: L^p(domain) -> L^q(range)||`` by duality-map ascent.

    Weights are absorbed by diagonal scaling.  Every iterate's ratio is a
    valid lower bound; the best over all starts is returned.  Default
    starts: all-ones, a seeded random vector and the ``nbasis`` basis
    vectors with the largest columns.
    """
    K = np.atleast_2d(np.asarray(kernel))
    m, n = K.shape
    p, q = quad.p, quad.q
    mu = np.ones(n) if domain_weights is None else np.asarray(domain_weights, dtype=np.float64)
    nu = np.ones(m) if range_weights is None else np.asarray(range_weights, dtype=np.float64)
    left = nu ** (1.0 / q)
    right = mu ** (-1.0 / p) if not math.isinf(p) else np.ones(n)
    A = left[:, None] * K * right[None, :]
    pstar = conjugate(p)
    if starts is None:
        rng = np.random.default_rng(seed)
        starts = [np.ones(n), rng.standard_normal(n)]
        cols = np.argsort(-np.linalg.norm(A, axis=0), kind="stable")[: min(nbasis, n)]
        for j in cols:
            e = np.zeros(n)
            e[j] = 1.0
            starts.append(e)
    best, best_x = 0.0, np.zeros(n)
    histories = []
    all_conv = True
    for x0 in starts:
        x = np.asarray(x0, dtype=A.dtype if np.iscomplexobj(A) else np.float64)
        nx = _pnorm(x, p)
        if nx == 0:
            continue
        x = x / nx
        hist = [_pnorm(A @ x, q)]
        conv = False
        for _ in range(iters):
            y = A @ x
            if not np.any(y):
                conv = True
                break
            z = A.conj().T @ _dual(y, q)
            if not np.any(z):
                conv = True
                break
            if math.isinf(pstar):
                # p = 1: all mass on the largest |z|
                x = np.zeros(n, dtype=z.dtype)
                j = int(np.argmax(np.abs(z)))
                x[j] = z[j] / abs(z[j])
            else:
                x = _dual(z, pstar)
            x = x / _pnorm(x, p)
            val = _pnorm(A @ x, q)
            hist.append(val)
            if val > best:
                best, best_x = val, x * right
            if abs(hist[-1] - hist[-2]) <= tol * max(hist[-1], 1e-300):
                conv = True
                break
        if hist[0] > best:
            best, best_x = hist[0], np.asarray(x0) / nx * right
        all_conv &= conv
        histories.append(hist)
    return AscentResult(best, best_x, histories, all_conv)


__all__ = [
    "AscentResult",
    "CarlesonMeasure",
    "DiscreteMap",
    "ProjectionSequence",
    "RealizedNorm",
    "WeightedPushforward",
    "bound_engine_lower",
    "bound_engine_upper",
    "carleson_hat",
    "change_of_variables_check",
    "inclusion_essnorm",
    "dilation_complement_oracle",
    "interior_tail_oracle",
    "me_cphi_norm",
    "multiplier_essnorm",
    "multiplier_essnorm_smallp",
    "multiplier_norm_exact",
    "multiplier_tail_norm",
    "operator_norm_ascent",
    "weighted_pushforward_lebesgue",
    "witness_ratio_oracle",
    "wco_essnorm",
]
