"""Dirichlet polynomials ``sum a_n n^{-s}`` and their Bohr lift to the polytorus."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from ._expr import parse_complex
from .bounds import BoundEstimate
from .exponents import ExponentQuad
from .hardy import FrequencyPolynomial, analytic_shift_witness, hp_norm

MAX_LIFT_PRIMES = 3


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for k in range(2, int(n**0.5) + 1):
        if sieve[k]:
            sieve[k * k :: k] = False
    return np.flatnonzero(sieve)


def first_primes(count: int) -> np.ndarray:
    bound = 16
    while True:
        ps = primes_up_to(bound)
        if ps.size >= count:
            return ps[:count]
        bound *= 2


def factor_exponents(n: int, primes) -> Optional[tuple]:
    """Exponent vector of ``n`` over ``primes``, or None if another prime divides ``n``."""
    alpha = []
    for p in primes:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        alpha.append(e)
    return tuple(alpha) if n == 1 else None


def greatest_prime_divisor(n: int) -> int:
    if n < 2:
        return 1
    g, p = 1, 2
    while p * p <= n:
        while n % p == 0:
            n //= p
            g = p
        p += 1
    return max(g, n) if n > 1 else g


class DirichletPolynomial:
    """Finite Dirichlet series; ``coeffs[k]`` multiplies ``(k+1)^{-s}``."""

    def __init__(self, coeffs):
        if isinstance(coeffs, dict):
            top = max(coeffs) if coeffs else 1
            arr = np.zeros(top, dtype=np.complex128)
            for n, a in coeffs.items():
                if n < 1:
                    raise ValueError("indices start at 1")
                arr[n - 1] += a
        else:
            arr = np.array(coeffs, dtype=np.complex128).ravel()
        nz = np.flatnonzero(arr)
        arr = arr[: nz[-1] + 1] if nz.size else arr[:1] * 0
        if arr.size == 0:
            arr = np.zeros(1, dtype=np.complex128)
        self.coeffs = arr

    @classmethod
    def parse(cls, text: str) -> "DirichletPolynomial":
        """``"1:1+0i, 2:2, 3:1"``: comma-separated ``n:coefficient`` pairs."""
        terms = {}
        for item in filter(None, (t.strip() for t in text.split(","))):
            n, sep, a = item.partition(":")
            if not sep:
                raise ValueError(f"expected n:coefficient, got {item!r}")
            n = int(n)
            terms[n] = terms.get(n, 0) + parse_complex(a)
        return cls(terms)

    def format(self) -> str:
        parts = []
        for n in self.support():
            a = complex(self.coeffs[n - 1])
            txt = repr(a.real) if a.imag == 0 else f"{a.real!r}{a.imag:+}i"
            parts.append(f"{n}:{txt}")
        return ", ".join(parts)

    def support(self) -> list:
        return [int(k) + 1 for k in np.flatnonzero(self.coeffs)]

    @property
    def length(self) -> int:
        return self.coeffs.size

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.complex128)
        out = np.zeros(s.shape, dtype=np.complex128)
        for n in self.support():
            out = out + self.coeffs[n - 1] * np.exp(-s * math.log(n))
        return out

    def __eq__(self, other):
        return isinstance(other, DirichletPolynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"DirichletPolynomial({self.format()!r})"

    def norm2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


@dataclass
class BohrLiftResult:
    poly: FrequencyPolynomial
    primes: tuple

    @property
    def nprimes(self) -> int:
        return len(self.primes)


def bohr_lift(D: DirichletPolynomial, nprimes: Optional[int] = None) -> BohrLiftResult:
    """``n^{-s} -> z^{alpha(n)}`` with ``n = prod p_j^{alpha_j}``."""
    supp = D.support() or [1]
    gpd = max(greatest_prime_divisor(n) for n in supp)
    primes = tuple(int(p) for p in primes_up_to(gpd)) if nprimes is None else tuple(int(p) for p in first_primes(nprimes))
    if not primes:
        primes = (2,)
    terms = {}
    for n in supp:
        alpha = factor_exponents(n, primes)
        if alpha is None:
            raise ValueError(f"{n} has a prime factor beyond {primes[-1]}")
        terms[alpha] = complex(D.coeffs[n - 1]) if n <= D.length else 0j
    return BohrLiftResult(FrequencyPolynomial.from_dict(terms), primes)


def bohr_transform(lift: BohrLiftResult) -> DirichletPolynomial:
    """Inverse of :func:`bohr_lift`."""
    out = {}
    for alpha, c in lift.poly.terms().items():
        if min(alpha) < 0:
            raise ValueError("non-analytic frequency has no Dirichlet counterpart")
        n = 1
        for p, e in zip(lift.primes, alpha):
            n *= p**e
        out[n] = c
    return DirichletPolynomial(out)


def restrict_PN(D: DirichletPolynomial, N: int) -> DirichletPolynomial:
    """Keep the terms whose greatest prime divisor is at most the ``N``-th prime."""
    if N < 1:
        raise ValueError("N must be >= 1")
    pN = int(first_primes(N)[-1])
    c = D.coeffs.copy()
    for n in D.support():
        if greatest_prime_divisor(n) > pN:
            c[n - 1] = 0
    return DirichletPolynomial(c)


def _lift_grid(lift: BohrLiftResult, p: float, grid: Optional[int]) -> np.ndarray:
    if lift.nprimes > MAX_LIFT_PRIMES:
        raise ValueError(f"lift quadrature supports at most {MAX_LIFT_PRIMES} primes, got {lift.nprimes}")
    if grid is None:
        deg = max(lift.poly.coeffs.shape) - 1 + max(lift.poly.low)
        mult = 2 if math.isinf(p) else max(2, math.ceil(p))
        grid = 1 << max(6, math.ceil(math.log2(mult * max(deg, 1) + 1)))
        while grid**lift.nprimes > 2**24:
            grid //= 2
    return lift.poly.evaluate_grid(grid)


def hp_norm_dirichlet(
    D: DirichletPolynomial,
    p: float,
    method: str = "lift_quadrature",
    grid: Optional[int] = None,
    T: float = 1e5,
    step: float = 0.01,
) -> float:
    """``||D||_p`` by quadrature on the lift, Parseval (``p = 2``) or a time average of ``|D(it)|^p``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if method == "parseval":
        if p != 2:
            raise ValueError("parseval needs p = 2")
        return D.norm2()
    if method == "lift_quadrature":
        vals = _lift_grid(bohr_lift(D), p, grid)
        return hp_norm(vals, p)
    if method == "ergodic":
        if math.isinf(p):
            raise ValueError("ergodic average needs finite p")
        supp = D.support()
        log_n = np.log(np.array(supp, dtype=np.float64))
        a = D.coeffs[np.array(supp) - 1]
        count = int(round(2 * T / step)) + 1
        mean = _kernels.dirichlet_time_average(log_n, a, -T, step, count, p)
        return mean ** (1.0 / p)
    raise ValueError(f"unknown method {method!r}")


def multiplier_essnorm_dirichlet(D: DirichletPolynomial, quad: ExponentQuad, grid: Optional[int] = None) -> BoundEstimate:
    """Essential norm of ``M_D`` between Dirichlet-Hardy spaces.

    ``q < p < inf``: ``||D||_r``.  ``p = q = 1``: ``||D||_inf`` as a grid sup
    on the lift (a lower approximation of the true sup).  ``p = inf``:
    ``||D||_2`` when ``q = 2``, else the bracket ``[||D||_q / 2, ||D||_q]``.
    """
    if quad.p < quad.q:
        raise ValueError("no bounded multipliers from H^p to H^q when p < q")
    if quad.p == quad.q:
        if quad.p != 1:
            raise ValueError("p = q is handled only for p = q = 1")
        v = hp_norm_dirichlet(D, math.inf, grid=grid)
        return BoundEstimate(v, v, "dirichlet multiplier p=q=1: ||D||_inf", notes={"grid_limited": True})
    if quad.p_finite:
        v = hp_norm_dirichlet(D, quad.r, grid=grid)
        return BoundEstimate(v, v, "dirichlet multiplier: ||D||_r")
    v = hp_norm_dirichlet(D, quad.q, grid=grid)
    if quad.q == 2:
        return BoundEstimate(v, v, "dirichlet multiplier p=inf, q=2: ||D||_2")
    return BoundEstimate(0.5 * v, v, "dirichlet multiplier p=inf: [1/2, 1] * ||D||_q")


def dirichlet_shift_witness(D: DirichletPolynomial, quad: ExponentQuad, degree: int, k: int = 1, grid: Optional[int] = None):
    """Witness ratio for ``M_D`` from :func:`analytic_shift_witness` on the lift."""
    lift = bohr_lift(D)
    vals = _lift_grid(lift, quad.r, grid)
    return analytic_shift_witness(vals, quad, degree, k)


def essnorm_lower_infty2(D: DirichletPolynomial, N: int) -> float:
    """``||R_N M_D 2^{-ns}||_2`` with ``2^n > N`` and ``R_N`` killing frequencies ``<= N``.

    All shifted frequencies exceed ``N``, so this is ``||D||_2`` exactly.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    n = max(N, 1).bit_length()
    shift = 2**n
    idx = shift * np.arange(1, D.length + 1)
    kept = D.coeffs[idx > N]
    return float(np.sqrt(np.sum(np.abs(kept) ** 2)))


def range_closure_test(
    D: DirichletPolynomial,
    lam: complex,
    sigma_min: float,
    sigma_max: Optional[float] = None,
    t_max: float = 50.0,
    n_sigma: int = 401,
    n_t: int = 2001,
    tol: float = 1e-3,
) -> tuple[float, str]:
    """Grid minimum of ``|D(s) - lam|`` over ``sigma_min <= Re s <= sigma_max``, ``|Im s| <= t_max``.

    Heuristic: a small minimum suggests ``lam`` is near the range, nothing more.
    """
    if sigma_min <= 0:
        raise ValueError("sigma_min must be > 0")
    sigma_max = sigma_min + 10.0 if sigma_max is None else sigma_max
    sig = np.linspace(sigma_min, sigma_max, n_sigma)
    t = np.linspace(-t_max, t_max, n_t)
    best = math.inf
    for s0 in sig:
        best = min(best, float(np.abs(D(s0 + 1j * t) - lam).min()))
    return best, ("near-range" if best <= tol else "separated")


__all__ = [
    "BohrLiftResult",
    "DirichletPolynomial",
    "bohr_lift",
    "bohr_transform",
    "dirichlet_shift_witness",
    "essnorm_lower_infty2",
    "factor_exponents",
    "first_primes",
    "greatest_prime_divisor",
    "hp_norm_dirichlet",
    "multiplier_essnorm_dirichlet",
    "primes_up_to",
    "range_closure_test",
    "restrict_PN",
]
