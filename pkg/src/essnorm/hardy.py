"""Functions on the circle and on the polytorus T^N (N <= 3).

Grid functions are plain numpy arrays sampled at ``2*pi*j/M`` along every
axis.  Trigonometric polynomials are :class:`FrequencyPolynomial` objects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._expr import parse_complex
from .exponents import ExponentQuad, conjugate

EPS_FLOOR = 1e-8
MAX_POINTS = 2**24


def grid_angles(m: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(m) / m


def _check_grid(f: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    if f.ndim < 1 or f.ndim > 3:
        raise ValueError("grid functions live on T^N with 1 <= N <= 3")
    for n in f.shape:
        if n < 1 or n & (n - 1):
            raise ValueError(f"grid size {n} is not a power of two")
    if f.size > MAX_POINTS:
        raise ValueError("grid exceeds 2**24 points")
    return f


@dataclass
class FrequencyPolynomial:
    """Trigonometric polynomial; ``coeffs[idx]`` multiplies ``z^(idx + low)``."""

    coeffs: np.ndarray
    low: tuple

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        self.low = tuple(int(v) for v in self.low)
        if len(self.low) != self.coeffs.ndim:
            raise ValueError("low must give one offset per axis")

    @classmethod
    def from_dict(cls, terms: dict) -> "FrequencyPolynomial":
        keys = [tuple(k) if np.ndim(k) else (int(k),) for k in terms]
        n = len(keys[0])
        lo = tuple(min(k[j] for k in keys) for j in range(n))
        hi = tuple(max(k[j] for k in keys) for j in range(n))
        c = np.zeros(tuple(h - l + 1 for l, h in zip(lo, hi)), dtype=np.complex128)
        for k, v in zip(keys, terms.values()):
            c[tuple(kj - lj for kj, lj in zip(k, lo))] += v
        return cls(c, lo)

    @property
    def ndim(self) -> int:
        return self.coeffs.ndim

    def terms(self) -> dict:
        out = {}
        for idx in zip(*np.nonzero(self.coeffs)):
            out[tuple(int(i) + l for i, l in zip(idx, self.low))] = complex(self.coeffs[idx])
        return out

    def is_analytic(self, tol: float = 0.0) -> bool:
        for axis, lo in enumerate(self.low):
            neg = -lo
            if neg > 0:
                block = np.take(self.coeffs, range(min(neg, self.coeffs.shape[axis])), axis=axis)
                if np.any(np.abs(block) > tol):
                    return False
        return True

    def shift(self, monomial: Sequence[int]) -> "FrequencyPolynomial":
        """Multiply by ``z^monomial``."""
        return FrequencyPolynomial(self.coeffs, tuple(l + int(m) for l, m in zip(self.low, monomial)))

    def norm2(self) -> float:
        """L^2 norm by Parseval."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def evaluate_grid(self, m) -> np.ndarray:
        """Values on the uniform ``m^N`` grid (exact at grid points)."""
        shape = (m,) * self.ndim if np.isscalar(m) else tuple(m)
        a = np.zeros(shape, dtype=np.complex128)
        idx = np.ix_(*[(np.arange(n) + lo) % s for n, lo, s in zip(self.coeffs.shape, self.low, shape)])
        np.add.at(a, idx, self.coeffs)
        return np.fft.ifftn(a) * a.size

    def __call__(self, *thetas) -> np.ndarray:
        """Evaluate at angles (one array per variable)."""
        out = 0j
        terms = self.terms()
        for k, c in terms.items():
            out = out + c * np.exp(1j * sum(kj * np.asarray(t) for kj, t in zip(k, thetas)))
        return out


def grid_coefficients(f: np.ndarray) -> FrequencyPolynomial:
    """All DFT coefficients of a grid function, frequencies -M/2 .. M/2-1 per axis."""
    f = _check_grid(f)
    c = np.fft.fftshift(np.fft.fftn(f) / f.size)
    return FrequencyPolynomial(c, tuple(-(n // 2) for n in f.shape))


def resample(f: np.ndarray, m: int) -> np.ndarray:
    """Trigonometric interpolation of ``f`` onto an ``m^N`` grid (``m`` >= current size).

    Exact for band-limited inputs of degree < M/2.
    """
    f = _check_grid(f)
    if all(n == m for n in f.shape):
        return np.array(f, dtype=np.complex128)
    if any(n > m for n in f.shape):
        raise ValueError("resample only refines")
    poly = grid_coefficients(f)
    c = poly.coeffs.copy()
    # split the Nyquist coefficient symmetrically so real inputs stay real
    for axis, n in enumerate(f.shape):
        if n > 1:
            sl = [slice(None)] * c.ndim
            sl[axis] = 0
            nyq = c[tuple(sl)] / 2
            c[tuple(sl)] = nyq
            c = np.concatenate([c, np.expand_dims(nyq, axis)], axis=axis)
    return FrequencyPolynomial(c, poly.low).evaluate_grid(m)


def hp_norm(f, p: float, grid: Optional[int] = None) -> float:
    """L^p norm on the torus (normalized Haar measure).

    Grid arrays use the trapezoid rule; a :class:`FrequencyPolynomial` with
    ``p = 2`` uses Parseval, otherwise it is sampled on ``grid`` points per axis.
    """
    if isinstance(f, FrequencyPolynomial):
        if p == 2:
            return f.norm2()
        if grid is None:
            span = max(f.coeffs.shape)
            grid = 1 << max(4, int(math.ceil(math.log2(4 * span + 1))))
        f = f.evaluate_grid(grid)
    a = np.abs(np.asarray(f))
    if math.isinf(p):
        return float(a.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.mean(a**p)) ** (1.0 / p)


def analytic_residual(g: np.ndarray) -> float:
    """Fraction of L^2 energy of ``g`` in negative frequencies."""
    c = np.fft.fft(np.asarray(g)) / g.size
    k = np.fft.fftfreq(g.size, d=1.0 / g.size)
    tot = np.sum(np.abs(c) ** 2)
    return float(np.sum(np.abs(c[k < 0]) ** 2) / tot) if tot > 0 else 0.0


def outer_with_modulus(modulus: np.ndarray) -> np.ndarray:
    """Outer function with boundary modulus ``modulus`` on a circle grid.

    ``g = exp(log G + i H(log G))`` with the conjugate function computed by
    the frequency multiplier ``-i sign(k)``.  Values below 1e-8 are clamped,
    so ``|g| = max(G, 1e-8)`` at the grid points.
    """
    G = np.asarray(modulus, dtype=np.float64)
    if G.ndim != 1:
        raise ValueError("outer functions are built on the circle (1-D grids)")
    _check_grid(G)
    if not np.all(np.isfinite(G)):
        raise ValueError("modulus has non-finite values")
    h = np.log(np.maximum(G, EPS_FLOOR))
    c = np.fft.fft(h)
    m = G.size
    k = np.fft.fftfreq(m, d=1.0 / m)
    mult = np.where(k > 0, 2.0, 0.0)
    mult[0] = 1.0
    if m % 2 == 0 and m > 1:
        mult[m // 2] = 1.0  # Nyquist: conjugate function vanishes there
    return np.exp(np.fft.ifft(c * mult))


def holder_extremizer(F: np.ndarray, s: float) -> tuple[np.ndarray, float]:
    """Unit-norm ``G`` in ``L^{s*}`` maximizing ``∫ F G``: ``G = (F/||F||_s)^{s-1}``.

    Returns ``(G, ∫ F G dσ)``; the value equals ``||F||_s``.
    """
    F = np.asarray(F, dtype=np.float64)
    if np.any(F < 0):
        raise ValueError("F must be nonnegative")
    if s < 1:
        raise ValueError("s must be >= 1")
    if not np.any(F > 0):
        return np.ones(F.shape), 0.0
    if s == 1:
        G = np.ones(F.shape)
    else:
        nF = hp_norm(F, s)
        G = (F / nF) ** (s - 1.0)
    return G, float(np.mean(F * G))


def superinner_sup_realize(F: np.ndarray, quad: ExponentQuad) -> tuple[np.ndarray, float]:
    """Analytic ``g`` with ``||g||_p = 1`` and ``∫ F |g|^q dσ = ||F||_s``.

    ``g`` is the outer function with modulus ``G^{1/q}``, ``G`` the Hölder
    extremizer of ``F`` for the exponent ``s``.
    """
    if quad.p <= quad.q:
        raise ValueError("needs p > q")
    F = np.asarray(F, dtype=np.float64)
    G, _ = holder_extremizer(F, quad.s)
    g = outer_with_modulus(G ** (1.0 / quad.q))
    value = float(np.mean(F * np.abs(g) ** quad.q))
    return g, value


def fejer_weights(n: int, ndim: int = 1) -> np.ndarray:
    w1 = 1.0 - np.abs(np.arange(-n, n + 1)) / (n + 1.0)
    w = w1
    for _ in range(ndim - 1):
        w = np.multiply.outer(w, w1)
    return w


def fejer_approx(f: np.ndarray, degree: int) -> FrequencyPolynomial:
    """Cesàro mean of order ``degree`` (product Fejér kernel on T^N).

    Needs at least ``2*degree + 1`` grid points per axis, which makes the
    result a convolution with a nonnegative kernel: nonnegativity and sup
    bounds of ``f`` carry over.
    """
    f = _check_grid(f)
    if degree < 1:
        raise ValueError("degree must be >= 1")
    if any(m < 2 * degree + 1 for m in f.shape):
        raise ValueError(f"grid {f.shape} too coarse for Fejér degree {degree}")
    c = np.fft.fftn(f) / f.size
    idx = np.ix_(*[np.arange(-degree, degree + 1) % m for m in f.shape])
    coeffs = c[idx] * fejer_weights(degree, f.ndim)
    return FrequencyPolynomial(coeffs, (-degree,) * f.ndim)


def analytic_shift_witness(
    F: np.ndarray, quad: ExponentQuad, n: int, k: int = 1
) -> tuple[FrequencyPolynomial, float]:
    """Analytic polynomial ``E = z_1^k P Q`` with ``|E| = |Q|``, ``Q`` the Fejér
    mean of ``|F|^t``; returns ``(E, ||F E||_q / ||E||_p)``.

    The ratio does not depend on ``k`` and tends to ``||F||_r`` as ``n`` grows.
    ``F`` is refined by trigonometric interpolation when the grid is too
    coarse for degree ``n``.
    """
    if quad.t is None:
        raise ValueError("needs finite p > q")
    F = _check_grid(F)
    m = F.shape[0]
    while m < 2 * n + 2:
        m *= 2
    if m != F.shape[0]:
        F = resample(F, m)
    G = np.abs(F) ** quad.t
    Q = fejer_approx(G, n)
    shift = [n] * F.ndim
    shift[0] += k
    E = Q.shift(shift)
    vals = E.evaluate_grid(m)
    num = hp_norm(F * vals, quad.q)
    den = hp_norm(vals, quad.p)
    return E, (num / den if den > 0 else 0.0)


# -- peaking sequences ---------------------------------------------------------


@dataclass
class FactReport:
    eps: float
    outside: np.ndarray  # outside[n, m] = ∫_{T \ A_n} |R_n - R_m|
    inside: np.ndarray  # inside[n, m] = ∫_{A_n} |R_n - R_m|
    l1_norms: np.ndarray
    peak_ratio: np.ndarray  # max|R_n| * mu(A_n)
    passed: bool

    def pairs(self):
        c = self.outside.shape[0]
        return [(n, m) for n in range(c) for m in range(n + 1, c)]


@dataclass
class PeakingSequence:
    degrees: list
    masses: list
    sets: list  # boolean masks on the fine grid
    values: list  # R_n on the fine grid
    report: FactReport
    grid: int = 0
    notes: dict = field(default_factory=dict)


def _longest_circular_run(mask: np.ndarray) -> tuple[int, int]:
    m = mask.size
    if mask.all():
        return 0, m
    start = int(np.flatnonzero(~mask)[0]) + 1
    rolled = np.roll(mask, -start)
    best = (0, 0)
    cur = 0
    for i, v in enumerate(rolled):
        cur = cur + 1 if v else 0
        if cur > best[1]:
            best = ((i - cur + 1 + start) % m, cur)
    return best


def _nested_arcs(mask: np.ndarray, M: int, count: int):
    scale = M // mask.size
    start, length = _longest_circular_run(mask)
    start, length = start * scale, length * scale
    sets, masses = [], []
    for level in range(count):
        if length < 1:
            raise ValueError(
                f"superlevel arc too small: level {level} of {count} would be empty at grid {M}; "
                "raise max_grid or lower count"
            )
        A = np.zeros(M, dtype=bool)
        A[(start + np.arange(length)) % M] = True
        sets.append(A)
        masses.append(length / M)
        new = length // 4
        start = start + (length - new) // 2
        length = new
    return sets, masses


def _egorov_degree(h: np.ndarray, mu: float, eps: float):
    M = h.size
    deg = 4
    while 2 * deg + 1 <= M:
        Q = np.real(fejer_approx(h, deg).evaluate_grid(M))
        if (np.abs(Q - h) > eps).mean() <= eps * mu:
            return deg, Q
        deg *= 2
    return None, None


def peaking_sequence(
    F: np.ndarray, eps: float, count: int, fine_grid: int = 2**16, max_grid: int = 2**20
) -> PeakingSequence:
    """Nested arcs ``A_n`` where ``|F| >= ||F||_inf - eps`` with
    ``mu(A_{n+1}) <= mu(A_n)/4``, smoothed by Fejér means and made analytic by
    a monomial factor; certifies both separation inequalities for every pair.

    The degree of each Fejér mean is the smallest power of two for which
    ``|Q_n - 1_{A_n}/mu(A_n)| <= eps`` outside a set of mass ``<= eps mu(A_n)``.
    The required degree grows like ``1/(eps mu)^2``, so the working grid is
    doubled (up to ``max_grid``) until every level succeeds.
    """
    F = np.asarray(F)
    if F.ndim != 1:
        raise ValueError("peaking_sequence works on the circle")
    _check_grid(F)
    sup = float(np.abs(F).max())
    if not 0 < eps < min(0.25, sup):
        raise ValueError("need 0 < eps < min(1/4, ||F||_inf)")
    mask = np.abs(F) >= sup - eps
    M = max(fine_grid, F.size)
    while True:
        sets, masses = _nested_arcs(mask, M, count)
        found = [_egorov_degree(A / mu, mu, eps) for A, mu in zip(sets, masses)]
        if all(d is not None for d, _ in found):
            break
        if 2 * M > max_grid:
            raise ValueError(f"no Fejér degree below {M // 2} meets the Egorov condition; raise max_grid")
        M *= 2
    theta = grid_angles(M)
    degrees = [d for d, _ in found]
    values = [np.exp(1j * d * theta) * Q for d, Q in found]
    c = len(values)
    outside = np.zeros((c, c))
    inside = np.zeros((c, c))
    for n in range(c):
        for m in range(n + 1, c):
            d = np.abs(values[n] - values[m])
            inside[n, m] = np.sum(d[sets[n]]) / M
            outside[n, m] = np.sum(d[~sets[n]]) / M
    l1 = np.array([np.mean(np.abs(v)) for v in values])
    peak = np.array([np.abs(v).max() * mu for v, mu in zip(values, masses)])
    iu = np.triu_indices(c, 1)
    passed = bool(np.all(outside[iu] < 4 * eps) and np.all(inside[iu] >= 0.125))
    report = FactReport(eps, outside, inside, l1, peak, passed)
    return PeakingSequence(
        degrees, masses, sets, values, report, grid=M, notes={"min_Q": min(Q.min() for _, Q in found)}
    )


# -- text format -----------------------------------------------------------------


def parse_circle_function(text: str, m: int) -> np.ndarray:
    """``const c``, ``poly: c0,c1,...``, ``abs-of-poly: c0,c1[; power=k]`` or
    ``csv:<path>`` sampled on ``m`` points of the circle."""
    text = text.strip()
    z = np.exp(1j * grid_angles(m))
    if text.startswith("const"):
        return np.full(m, parse_complex(text[5:].lstrip(": ")), dtype=np.complex128)
    if text.startswith("csv:"):
        vals = np.loadtxt(text[4:], delimiter=",", dtype=np.float64).ravel()
        if vals.size != m:
            vals = resample(vals, m).real if vals.size < m else vals
        return vals
    kind, _, body = text.partition(":")
    kind = kind.strip()
    opts = body.split(";")
    coeffs = [parse_complex(v) for v in opts[0].split(",") if v.strip()]
    power = 1.0
    for o in opts[1:]:
        key, _, val = o.partition("=")
        if key.strip() != "power":
            raise ValueError(f"unknown option {key!r}")
        power = float(val)
    vals = np.polyval(coeffs[::-1], z)
    if kind == "poly":
        return vals
    if kind == "abs-of-poly":
        return np.abs(vals) ** power
    raise ValueError(f"unknown circle function {text!r}")


__all__ = [
    "FrequencyPolynomial",
    "FactReport",
    "PeakingSequence",
    "analytic_residual",
    "analytic_shift_witness",
    "conjugate",
    "fejer_approx",
    "grid_angles",
    "grid_coefficients",
    "holder_extremizer",
    "hp_norm",
    "outer_with_modulus",
    "parse_circle_function",
    "peaking_sequence",
    "resample",
    "superinner_sup_realize",
]
