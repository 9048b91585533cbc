import numpy as np
import pytest

from essnorm import _kernels


@pytest.fixture
def both():
    old = _kernels.get_backend()
    yield
    _kernels.set_backend(old)


def _run_both(fn):
    out = {}
    for name in ("numba", "numpy"):
        _kernels.set_backend(name)
        out[name] = fn()
    return out


def test_backends_agree(both):
    rng = np.random.default_rng(0)
    zeros = (rng.random(3) * 0.8) * np.exp(2j * np.pi * rng.random(3))
    th = rng.random(500) * 2 * np.pi
    z = 0.9 * np.exp(1j * th)
    pts = 0.9 * rng.random(4) * np.exp(2j * np.pi * rng.random(4))
    checks = {
        "blaschke": lambda: _kernels.blaschke_eval(z, zeros, 1j),
        "lifted": lambda: _kernels.lifted_angle(th, zeros, 0.3),
        "invert": lambda: _kernels.invert_lifted_angle(np.linspace(0.5, 3, 7), zeros, 0.0, 0.0, 2 * np.pi),
        "time": lambda: _kernels.dirichlet_time_average(np.log([1.0, 2.0, 3.0]), np.array([1, 2, 1], complex), -50, 0.01, 10001, 4),
        "carleson": lambda: _kernels.carleson_hat_grid(pts, np.ones(4), th),
    }
    for name, fn in checks.items():
        r = _run_both(fn)
        assert np.allclose(r["numba"], r["numpy"], rtol=1e-12, atol=1e-12), name


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")
