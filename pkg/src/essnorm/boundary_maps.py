"""Holomorphic self-maps of the unit disc, their boundary traces, contact
sets and pushforward densities.

The pushforward density of a map is the Radon-Nikodym derivative of the
image of arc length on the contact set ``{|phi*| = 1}`` under the boundary
trace.  Densities are stored as bin averages on ``2**b`` equal arcs.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels
from ._expr import parse_complex
from .bounds import BoundEstimate
from .exponents import ExponentQuad

TWO_PI = 2.0 * math.pi

DEFAULT_DEPTH = 20
DEFAULT_DELTA = 1e-8
DEFAULT_NULL_MASS = 1e-3
_CHUNK = 1 << 18


class AnalyticSelfMap:
    """Base class: a holomorphic map of the closed-disc grid into the disc."""

    tail_bound = 0.0

    def __call__(self, z):
        raise NotImplementedError

    def check_self_map(self, nangles: int = 512, radii=(0.0, 0.5, 0.9, 0.99, 1.0)) -> tuple[float, bool]:
        """Sup of ``|phi|`` on a polar test grid and whether it stays <= 1 + 1e-9."""
        th = TWO_PI * np.arange(nangles) / nangles
        z = np.concatenate([r * np.exp(1j * th) for r in radii])
        sup = float(np.abs(self(z)).max())
        return sup, sup <= 1.0 + 1e-9 + self.tail_bound


class BlaschkeProduct(AnalyticSelfMap):
    """``eta * prod (z - a_j) / (1 - conj(a_j) z)``."""

    def __init__(self, zeros: Sequence[complex], rotation: complex = 1.0):
        self.zeros = np.asarray(zeros, dtype=np.complex128).ravel()
        if self.zeros.size < 1:
            raise ValueError("a Blaschke product needs at least one zero")
        if np.any(np.abs(self.zeros) >= 1):
            raise ValueError("Blaschke zeros must lie in the open unit disc")
        rotation = complex(rotation)
        if abs(abs(rotation) - 1.0) > 1e-12:
            raise ValueError("rotation must be unimodular")
        self.rotation = rotation / abs(rotation)

    @property
    def degree(self) -> int:
        return self.zeros.size

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return _kernels.blaschke_eval(z, self.zeros, self.rotation).reshape(z.shape)

    def rotated(self, alpha: float) -> "BlaschkeProduct":
        return BlaschkeProduct(self.zeros, self.rotation * np.exp(1j * alpha))

    def __repr__(self):
        return f"BlaschkeProduct(zeros={self.zeros.tolist()}, rotation={self.rotation})"


class TaylorSeries(AnalyticSelfMap):
    """Truncated power series ``sum c_k z^k`` with a bound on the neglected tail."""

    def __init__(self, coefficients: Sequence[complex], tail_bound: float = 0.0):
        self.coefficients = np.asarray(coefficients, dtype=np.complex128).ravel()
        if self.coefficients.size == 0:
            raise ValueError("empty Taylor series")
        self.tail_bound = float(tail_bound)

    def __call__(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        for c in self.coefficients[::-1]:
            out = out * z + c
        return out

    def __repr__(self):
        return f"TaylorSeries({self.coefficients.tolist()})"


class Composition(AnalyticSelfMap):
    """``maps[0] o maps[1] o ...`` (the last map is applied first)."""

    def __init__(self, maps: Sequence[AnalyticSelfMap]):
        if not maps:
            raise ValueError("empty composition")
        self.maps = list(maps)
        self.tail_bound = float(sum(m.tail_bound for m in self.maps))

    def __call__(self, z):
        out = np.asarray(z, dtype=np.complex128)
        for m in reversed(self.maps):
            out = m(out)
        return out

    def __repr__(self):
        return f"Composition({self.maps!r})"


def parse_map(text: str) -> AnalyticSelfMap:
    """Parse ``blaschke: a1,a2;rot=eta``, ``taylor: c0,c1,...`` or
    ``compose: <map>|<map>`` (right-most applied first)."""
    text = text.strip()
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    if kind == "compose":
        return Composition([parse_map(part) for part in body.split("|")])
    if kind == "blaschke":
        rot = 1.0
        parts = body.split(";")
        for extra in parts[1:]:
            key, _, val = extra.partition("=")
            if key.strip() != "rot":
                raise ValueError(f"unknown blaschke option {key!r}")
            rot = parse_complex(val)
        zeros = [parse_complex(v) for v in parts[0].split(",") if v.strip()]
        return BlaschkeProduct(zeros, rot)
    if kind == "taylor":
        parts = body.split(";")
        tail = 0.0
        for extra in parts[1:]:
            key, _, val = extra.partition("=")
            if key.strip() != "tail":
                raise ValueError(f"unknown taylor option {key!r}")
            tail = float(val)
        return TaylorSeries([parse_complex(v) for v in parts[0].split(",") if v.strip()], tail)
    raise ValueError(f"unknown map kind {kind!r} in {text!r}")


# -- boundary traces ----------------------------------------------------------


def radii_schedule(depth: int = DEFAULT_DEPTH) -> np.ndarray:
    return 1.0 - 2.0 ** -np.arange(1, depth + 1, dtype=np.float64)


@dataclass
class BoundaryTrace:
    value: np.ndarray  # Richardson-extrapolated radial limit
    last: np.ndarray  # phi(r_last * xi)
    converged: np.ndarray


def boundary_trace(phi: AnalyticSelfMap, theta, radii=None, tol: float = 1e-6) -> BoundaryTrace:
    """Radial limit of ``phi`` at ``e^{i theta}`` along ``radii`` (default 1 - 2^-j).

    The returned ``value`` extrapolates the last two radii linearly in
    ``1 - r`` (exact to O((1-r)^2) for maps smooth up to the boundary).
    ``converged`` is False where the last three evaluations do not settle.
    """
    theta = np.asarray(theta, dtype=np.float64)
    radii = radii_schedule() if radii is None else np.asarray(radii, dtype=np.float64)
    if radii.size < 3 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be increasing with at least three entries")
    xi = np.exp(1j * theta)
    v0, v1, v2 = (phi(r * xi) for r in radii[-3:])
    h1 = 1.0 - radii[-2]
    h2 = 1.0 - radii[-1]
    value = v2 + (v2 - v1) * h2 / (h1 - h2)
    d_prev = np.abs(v1 - v0)
    d_last = np.abs(v2 - v1)
    converged = (d_last <= tol) | (d_last <= 0.75 * d_prev)
    return BoundaryTrace(value, v2, converged)


# -- Blaschke products: exact angular data -----------------------------------


def _tau_offset(b: BlaschkeProduct) -> float:
    return float(np.angle(b.rotation))


def lifted_angle(b: BlaschkeProduct, theta) -> np.ndarray:
    """Continuous, increasing argument of ``B(e^{i theta})``; total increase 2*pi*degree."""
    return _kernels.lifted_angle(np.asarray(theta, dtype=np.float64), b.zeros, _tau_offset(b))


def boundary_speed_blaschke(b: BlaschkeProduct, theta) -> np.ndarray:
    """Angular derivative ``sum (1-|a|^2)/|e^{i theta}-a|^2`` of the boundary map."""
    theta = np.asarray(theta, dtype=np.float64)
    xi = np.exp(1j * theta)[..., None]
    a = b.zeros
    return np.sum((1.0 - np.abs(a) ** 2) / np.abs(xi - a) ** 2, axis=-1)


def _preimage_angles(b: BlaschkeProduct, targets: np.ndarray) -> np.ndarray:
    """Theta in [0, 2pi] with tau(theta) = target, clipped outside tau's range."""
    t0 = float(lifted_angle(b, np.array([0.0]))[0])
    t1 = t0 + TWO_PI * b.degree
    out = np.empty(targets.shape)
    lo = targets <= t0
    hi = targets >= t1
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = TWO_PI
    if np.any(mid):
        out[mid] = _kernels.invert_lifted_angle(targets[mid], b.zeros, _tau_offset(b), 0.0, TWO_PI)
    return out


def _sheets(b: BlaschkeProduct) -> np.ndarray:
    t0 = float(lifted_angle(b, np.array([0.0]))[0])
    first = math.floor(t0 / TWO_PI)
    last = math.floor((t0 + TWO_PI * b.degree) / TWO_PI)
    return np.arange(first, last + 1)


@dataclass
class ContactSetEstimate:
    indicator: np.ndarray  # contact fraction per angular bin of xi
    measure: float
    radius: float
    samples: int
    threshold: float

    @property
    def null(self) -> bool:
        return self.measure == 0.0


@dataclass
class PushforwardDensity:
    """Bin averages of the density on ``len(values)`` equal arcs of the circle."""

    values: np.ndarray
    provenance: dict = field(default_factory=dict)
    contact: Optional[ContactSetEstimate] = None

    @property
    def bins(self) -> int:
        return self.values.size

    def centers(self) -> np.ndarray:
        return TWO_PI * (np.arange(self.bins) + 0.5) / self.bins

    def mass(self) -> float:
        return float(np.mean(self.values))

    def norm(self, s: float) -> float:
        if math.isinf(s):
            return float(self.values.max())
        return float(np.mean(self.values**s)) ** (1.0 / s)


def pushforward_density_blaschke(b: BlaschkeProduct, bins: int = 1024) -> PushforwardDensity:
    """Exact bin averages of ``F = sum_{tau(theta)=t} 1/tau'(theta)`` for a Blaschke product.

    The average over an arc is the measure of its preimage divided by the arc
    length, obtained by inverting the lifted angle on every sheet.
    """
    _check_bins(bins)
    edges = TWO_PI * np.arange(bins + 1) / bins
    acc = np.zeros(bins)
    for sheet in _sheets(b):
        th = _preimage_angles(b, edges + TWO_PI * sheet)
        acc += np.diff(th)
    values = acc * bins / TWO_PI
    return PushforwardDensity(values, {"kind": "analytic", "map": repr(b)})


def blaschke_density_at(b: BlaschkeProduct, t) -> np.ndarray:
    """Point values ``F(e^{it}) = sum over preimages of 1/tau'``."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros(t.shape)
    base = np.mod(t, TWO_PI)
    t0 = float(lifted_angle(b, np.array([0.0]))[0])
    for sheet in _sheets(b):
        targ = base + TWO_PI * sheet
        inside = (targ >= t0) & (targ < t0 + TWO_PI * b.degree)
        if np.any(inside):
            th = _kernels.invert_lifted_angle(targ[inside], b.zeros, _tau_offset(b), 0.0, TWO_PI)
            out[inside] += 1.0 / boundary_speed_blaschke(b, th)
    return out


# -- Monte Carlo pushforward ---------------------------------------------------


def _check_bins(bins: int) -> None:
    if bins < 1 or bins & (bins - 1):
        raise ValueError("bins must be a power of two")


def _sample_angles(rng: np.random.Generator, start: int, count: int, total: int, sampling: str) -> np.ndarray:
    if sampling == "stratified":
        return TWO_PI * (np.arange(start, start + count) + rng.random(count)) / total
    if sampling == "iid":
        return TWO_PI * rng.random(count)
    raise ValueError(f"unknown sampling {sampling!r}")


def _trace_chunks(phi, samples: int, seed: int, sampling: str, depth: int):
    """Yield ``(theta, extrapolated trace)`` per chunk of boundary samples."""
    radii = radii_schedule(depth)
    seq = np.random.SeedSequence(seed)
    nchunks = -(-samples // _CHUNK)
    for c, child in enumerate(seq.spawn(nchunks)):
        rng = np.random.default_rng(child)
        start = c * _CHUNK
        count = min(_CHUNK, samples - start)
        theta = _sample_angles(rng, start, count, samples, sampling)
        yield theta, boundary_trace(phi, theta, radii).value


def contact_integral(
    phi: AnalyticSelfMap,
    func: Callable,
    samples: int = 10**6,
    seed: int = 0,
    delta: float = DEFAULT_DELTA,
    sampling: str = "stratified",
    null_mass: float = DEFAULT_NULL_MASS,
    depth: int = DEFAULT_DEPTH,
) -> tuple[float, float]:
    """Monte Carlo ``∫_E func(phi*(xi)) dσ(xi)`` over the contact set ``E``.

    Returns ``(integral, contact fraction)``; the integral is 0 when the
    contact fraction is below ``null_mass`` (same rule as the density).
    """
    thresh = delta + phi.tail_bound
    total = 0.0
    n_contact = 0
    for theta, value in _trace_chunks(phi, samples, seed, sampling, depth):
        inside = (1.0 - np.abs(value)) <= thresh
        n_contact += int(inside.sum())
        w = value[inside]
        total += math.fsum(np.real(np.asarray(func(w / np.abs(w)))))
    frac = n_contact / samples
    if frac < 0.01:
        warnings.warn(f"only {frac:.3%} of samples hit the contact set", RuntimeWarning, stacklevel=2)
    if frac < null_mass:
        return 0.0, frac
    return total / samples, frac


def pushforward_density_mc(
    phi: AnalyticSelfMap,
    weight: Optional[Callable] = None,
    q: float = 2.0,
    samples: int = 10**6,
    bins: int = 1024,
    seed: int = 0,
    delta: float = DEFAULT_DELTA,
    sampling: str = "stratified",
    null_mass: float = DEFAULT_NULL_MASS,
    depth: int = DEFAULT_DEPTH,
) -> PushforwardDensity:
    """Histogram estimate of the (weighted) pushforward density.

    Boundary points ``xi`` are drawn (jittered-stratified by default), the
    trace is extrapolated along ``1 - 2^-j``, and points with
    ``1 - |phi*| <= delta`` count as contact points, each weighted by
    ``|weight(theta)|^q``.  If the estimated contact measure is below
    ``null_mass`` the contact set is treated as null and ``F = 0``.
    """
    if samples < 10**4:
        raise ValueError("samples must be >= 1e4")
    _check_bins(bins)
    thresh = delta + phi.tail_bound
    hist = np.zeros(bins)
    contact_bins = np.zeros(bins)
    per_bin = np.zeros(bins)
    n_contact = 0
    for theta, value in _trace_chunks(phi, samples, seed, sampling, depth):
        inside = (1.0 - np.abs(value)) <= thresh
        n_contact += int(inside.sum())
        src_bin = np.minimum((theta * bins / TWO_PI).astype(np.int64), bins - 1)
        contact_bins += np.bincount(src_bin[inside], minlength=bins)
        per_bin += np.bincount(src_bin, minlength=bins)
        arg = np.mod(np.angle(value[inside]), TWO_PI)
        idx = np.minimum((arg * bins / TWO_PI).astype(np.int64), bins - 1)
        w = np.ones(idx.size) if weight is None else np.abs(np.asarray(weight(theta[inside]))) ** q
        hist += np.bincount(idx, weights=w, minlength=bins)
    frac = n_contact / samples
    radius = 3.0 * math.sqrt(max(frac * (1 - frac), 1.0 / samples) / samples)
    indicator = contact_bins / np.maximum(per_bin, 1)
    values = hist * bins / samples
    null = frac < null_mass
    if frac < 0.01:
        warnings.warn(f"only {frac:.3%} of samples hit the contact set", RuntimeWarning, stacklevel=2)
    if null:
        values = np.zeros(bins)
    contact = ContactSetEstimate(indicator, 0.0 if null else frac, radius, samples, thresh)
    prov = {"kind": "monte_carlo", "seed": seed, "samples": samples, "sampling": sampling, "raw_contact": frac}
    return PushforwardDensity(values, prov, contact)


def pushforward_density(phi: AnalyticSelfMap, bins: int = 1024, **mc) -> PushforwardDensity:
    """Analytic path for Blaschke products, Monte Carlo otherwise."""
    if isinstance(phi, BlaschkeProduct) and "weight" not in mc:
        return pushforward_density_blaschke(phi, bins)
    return pushforward_density_mc(phi, bins=bins, **mc)


def essnorm_composition(density: PushforwardDensity, quad: ExponentQuad) -> BoundEstimate:
    """Bracket for ``||C_phi||_e`` from ``||F||_s^{1/q}``; tight when ``q = 2``.

    For ``q != 2`` the upper constant is 2 (no value of the Szegő projection
    norm is used).
    """
    if quad.p <= quad.q:
        raise ValueError("essnorm_composition needs p > q")
    lower = density.norm(quad.s) ** (1.0 / quad.q)
    upper = lower * (1.0 if quad.q == 2 else 2.0)
    return BoundEstimate(lower, upper, "composition: ||F||_s^(1/q) <= ||C||_e <= min(2,||P_q||)||F||_s^(1/q)",
                         witness={"bins": density.bins, "provenance": density.provenance})
