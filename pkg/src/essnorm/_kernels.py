"""Hot numeric loops.

Each kernel has a loop form compiled with ``numba.njit`` and a vectorized
numpy form.  The numba path is used when numba imports and the environment
variable ``ESSNORM_NUMBA`` is not set to ``0``; :func:`set_backend` switches
at runtime (the benchmark uses it).
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_backend = "numba" if HAVE_NUMBA and os.environ.get("ESSNORM_NUMBA", "1") != "0" else "numpy"


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def get_backend() -> str:
    return _backend


def _jit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


# -- Blaschke products -------------------------------------------------------


def _blaschke_loop(z, zeros, rotation):
    out = np.empty(z.shape[0], dtype=np.complex128)
    for i in range(z.shape[0]):
        acc = rotation
        zi = z[i]
        for a in zeros:
            acc *= (zi - a) / (1.0 - a.conjugate() * zi)
        out[i] = acc
    return out


def _blaschke_np(z, zeros, rotation):
    out = np.full(z.shape, rotation, dtype=np.complex128)
    for a in zeros:
        out *= (z - a) / (1.0 - np.conj(a) * z)
    return out


_blaschke_jit = _jit(_blaschke_loop)


def blaschke_eval(z, zeros, rotation):
    z = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    zeros = np.ascontiguousarray(zeros, dtype=np.complex128)
    if _backend == "numba":
        return _blaschke_jit(z, zeros, complex(rotation))
    return _blaschke_np(z, zeros, complex(rotation))


# Lifted boundary angle of a Blaschke product: each factor contributes
# theta + 2*arg(1 - a e^{-i theta}), the arg staying in (-pi/2, pi/2).


def _tau_scalar(th, zeros, offset):
    c = math.cos(th)
    s = math.sin(th)
    acc = offset
    for a in zeros:
        re = 1.0 - (a.real * c + a.imag * s)
        im = -(a.imag * c - a.real * s)
        acc += th + 2.0 * math.atan2(im, re)
    return acc


_tau_scalar_jit = _jit(_tau_scalar)


def _lifted_angle_loop(theta, zeros, offset):
    out = np.empty(theta.shape[0])
    for i in range(theta.shape[0]):
        out[i] = _tau_scalar_jit(theta[i], zeros, offset)
    return out


def _lifted_angle_np(theta, zeros, offset):
    out = np.full(theta.shape, offset, dtype=np.float64)
    e = np.exp(-1j * theta)
    for a in zeros:
        out += theta + 2.0 * np.angle(1.0 - a * e)
    return out


_lifted_angle_jit = _jit(_lifted_angle_loop)


def lifted_angle(theta, zeros, offset):
    theta = np.ascontiguousarray(theta, dtype=np.float64).ravel()
    zeros = np.ascontiguousarray(zeros, dtype=np.complex128)
    if _backend == "numba":
        return _lifted_angle_jit(theta, zeros, float(offset))
    return _lifted_angle_np(theta, zeros, float(offset))


def _invert_loop(targets, zeros, offset, lo, hi, iters):
    out = np.empty(targets.shape[0])
    for i in range(targets.shape[0]):
        a = lo
        b = hi
        for _ in range(iters):
            m = 0.5 * (a + b)
            if _tau_scalar_jit(m, zeros, offset) < targets[i]:
                a = m
            else:
                b = m
        out[i] = 0.5 * (a + b)
    return out


def _invert_np(targets, zeros, offset, lo, hi, iters):
    a = np.full(targets.shape, lo)
    b = np.full(targets.shape, hi)
    for _ in range(iters):
        m = 0.5 * (a + b)
        below = _lifted_angle_np(m, zeros, offset) < targets
        a = np.where(below, m, a)
        b = np.where(below, b, m)
    return 0.5 * (a + b)


_invert_jit = _jit(_invert_loop)


def invert_lifted_angle(targets, zeros, offset, lo, hi, iters=64):
    """Solve tau(theta) = target by bisection on [lo, hi] (tau increasing)."""
    targets = np.ascontiguousarray(targets, dtype=np.float64).ravel()
    zeros = np.ascontiguousarray(zeros, dtype=np.complex128)
    if _backend == "numba":
        return _invert_jit(targets, zeros, float(offset), float(lo), float(hi), int(iters))
    return _invert_np(targets, zeros, float(offset), float(lo), float(hi), int(iters))


# -- Dirichlet polynomials on vertical lines -----------------------------------


def _time_average_loop(log_n, coeffs, t0, dt, count, p):
    acc = 0.0
    comp = 0.0
    for j in range(count):
        t = t0 + j * dt
        re = 0.0
        im = 0.0
        for k in range(log_n.shape[0]):
            ang = -t * log_n[k]
            c = math.cos(ang)
            s = math.sin(ang)
            re += coeffs[k].real * c - coeffs[k].imag * s
            im += coeffs[k].real * s + coeffs[k].imag * c
        val = (re * re + im * im) ** (0.5 * p)
        # Kahan summation: count reaches 2e7
        y = val - comp
        tot = acc + y
        comp = (tot - acc) - y
        acc = tot
    return acc / count


def _time_average_np(log_n, coeffs, t0, dt, count, p, chunk=1 << 20):
    total = 0.0
    for start in range(0, count, chunk):
        t = t0 + dt * np.arange(start, min(start + chunk, count), dtype=np.float64)
        vals = np.exp(-1j * np.outer(t, log_n)) @ coeffs
        total += math.fsum(np.abs(vals) ** p)
    return total / count


_time_average_jit = _jit(_time_average_loop)


def dirichlet_time_average(log_n, coeffs, t0, dt, count, p):
    """Mean of |sum a_n n^{-it}|^p over t = t0 + j*dt, j < count."""
    log_n = np.ascontiguousarray(log_n, dtype=np.float64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    if _backend == "numba":
        return float(_time_average_jit(log_n, coeffs, float(t0), float(dt), int(count), float(p)))
    return float(_time_average_np(log_n, coeffs, float(t0), float(dt), int(count), float(p)))


# -- Carleson functional on a circle grid ------------------------------------


def _carleson_loop(points, masses, thetas):
    out = np.zeros(thetas.shape[0])
    for j in range(thetas.shape[0]):
        c = math.cos(thetas[j])
        s = math.sin(thetas[j])
        for k in range(points.shape[0]):
            z = points[k]
            w = 1.0 - (z.real * c + z.imag * s)
            v = -(z.imag * c - z.real * s)
            rho = 1.0 - (z.real * z.real + z.imag * z.imag)
            if math.sqrt(w * w + v * v) < rho:
                out[j] += masses[k] / rho
    return out


def _carleson_np(points, masses, thetas):
    xi = np.exp(1j * thetas)[:, None]
    rho = 1.0 - np.abs(points) ** 2
    inside = np.abs(1.0 - points[None, :] * np.conj(xi)) < rho[None, :]
    return inside.astype(np.float64) @ (masses / rho)


_carleson_jit = _jit(_carleson_loop)


def carleson_hat_grid(points, masses, thetas):
    points = np.ascontiguousarray(points, dtype=np.complex128)
    masses = np.ascontiguousarray(masses, dtype=np.float64)
    thetas = np.ascontiguousarray(thetas, dtype=np.float64).ravel()
    if points.size == 0:
        return np.zeros(thetas.shape)
    if _backend == "numba":
        return _carleson_jit(points, masses, thetas)
    return _carleson_np(points, masses, thetas)
