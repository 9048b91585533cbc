"""Extended-real exponent bookkeeping.

Every formula in the package is phrased through a handful of exponents
derived from a pair ``(p, q)``.  They are stored as reciprocals so that
``p = inf`` and ``p < q`` need no special casing downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

INFINITY = math.inf

_TOL = 1e-12


def _check(p: float, name: str) -> float:
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValueError(f"exponent {name}={p!r} must be >= 1 or inf")
    return p


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def conjugate(p: float) -> float:
    """Hölder conjugate, with the conventions 1* = inf and inf* = 1."""
    p = _check(p, "p")
    if p == 1:
        return INFINITY
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class ExponentQuad:
    """Exponents attached to an operator ``L^p -> L^q``.

    ``inv_r = 1/q - 1/p`` is signed (negative when ``p < q``) and
    ``inv_s = 1 - q/p``.  ``t = q/(p-q)`` is only set for finite ``p > q``.
    """

    p: float
    q: float
    inv_r: float
    inv_s: float
    t: Optional[float]
    p_star: float
    q_star: float
    s_star: Optional[float]

    @property
    def r(self) -> float:
        if self.inv_r <= 0:
            raise ValueError("r is only materialized when 1/r > 0 (p > q)")
        return 1.0 / self.inv_r

    @property
    def s(self) -> float:
        if self.inv_s <= 0:
            raise ValueError("s is only materialized when p > q")
        return 1.0 / self.inv_s

    @property
    def p_finite(self) -> bool:
        return not math.isinf(self.p)


def derive_exponents(p: float, q: float, allow_equal: bool = False) -> ExponentQuad:
    p = _check(p, "p")
    q = _check(q, "q")
    if math.isinf(q):
        raise ValueError("q must be finite")
    if p == q and not allow_equal:
        raise ValueError("p == q gives a degenerate quad; pass allow_equal=True")
    inv_r = 0.0 if p == q else 1.0 / q - _inv(p)
    inv_s = 0.0 if p == q else 1.0 - q * _inv(p)
    t = q / (p - q) if (p > q and not math.isinf(p)) else None
    s_star = None
    if p > q:
        s_star = INFINITY if math.isinf(p) else p / q
    return ExponentQuad(
        p=p,
        q=q,
        inv_r=inv_r,
        inv_s=inv_s,
        t=t,
        p_star=conjugate(p),
        q_star=conjugate(q),
        s_star=s_star,
    )


def holder_identity_check(quad: ExponentQuad) -> bool:
    """True iff 1/p + 1/r = 1/q and 1/s + q/p = 1 to within 1e-12."""
    ip = _inv(quad.p)
    ok_r = abs(ip + quad.inv_r - 1.0 / quad.q) <= _TOL
    ok_s = abs(quad.inv_s + quad.q * ip - 1.0) <= _TOL
    return ok_r and ok_s
