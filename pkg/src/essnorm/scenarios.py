"""Scenario runners shared by the CLI: each turns a parameter dict into result rows."""
from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np

from ._expr import eval_expr, parse_complex
from .boundary_maps import BlaschkeProduct, parse_map, pushforward_density, essnorm_composition
from .dirichlet import DirichletPolynomial, hp_norm_dirichlet, multiplier_essnorm_dirichlet
from .exponents import derive_exponents
from .hardy import parse_circle_function, superinner_sup_realize
from .measure_model import GridFunction, MeasureSpace, lp_norm, sign_witness
from .operators import (
    CarlesonMeasure,
    DiscreteMap,
    inclusion_essnorm,
    multiplier_essnorm,
    multiplier_essnorm_smallp,
    operator_norm_ascent,
    wco_essnorm,
)
from .results import ResultRow

KINDS = ("compo", "mult", "mult-smallp", "dirichlet", "inclusion", "wco", "verify")

# keys accepted in scenario files / CLI flags, with defaults (None = required per kind)
DEFAULTS = {
    "name": None,
    "map": None,
    "u": None,
    "space": None,
    "target": None,
    "mu": None,
    "p": None,
    "q": None,
    "seed": 0,
    "grid": None,
    "samples": 10**6,
    "window": None,
    "tol": None,
    "suite": "core",
    "out": None,
    "json": None,
}

REQUIRED = {
    "compo": ("map", "p", "q"),
    "mult": ("space", "u", "p", "q"),
    "mult-smallp": ("space", "u", "p", "q"),
    "dirichlet": ("u", "p", "q"),
    "inclusion": ("mu", "p", "q"),
    "wco": ("space", "map", "p", "q"),
    "verify": (),
}


def parse_exponent(text) -> float:
    if isinstance(text, (int, float)):
        return float(text)
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "oo"):
        return math.inf
    return float(t)


def parse_window(text) -> Optional[tuple]:
    if text is None or text == "":
        return None
    if isinstance(text, (tuple, list)):
        return tuple(int(v) for v in text)
    a, _, b = str(text).partition(":")
    return int(a), int(b)


def parse_carleson(text: str, grid: int = 1024) -> CarlesonMeasure:
    """``points: z@m, z@m | density: <circle function>``; either part optional."""
    interior = []
    density = None
    for part in filter(None, (s.strip() for s in text.split("|"))):
        key, _, body = part.partition(":")
        key = key.strip()
        if key == "points":
            for item in filter(None, (t.strip() for t in body.split(","))):
                z, sep, m = item.partition("@")
                if not sep:
                    raise ValueError(f"point {item!r} needs the form z@mass")
                interior.append((parse_complex(z), float(m)))
        elif key == "density":
            density = np.real(parse_circle_function(body.strip(), grid))
        else:
            raise ValueError(f"unknown Carleson measure part {key!r}")
    return CarlesonMeasure(interior, density)


def parse_discrete_map(text: str, source: MeasureSpace, target: MeasureSpace) -> DiscreteMap:
    """``diffuse=<expr in x>; atoms=a->b, c->d; refine=k``."""
    diffuse = None
    atoms = {}
    refine = 16
    for part in filter(None, (s.strip() for s in text.split(";"))):
        key, sep, body = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value in map text, got {part!r}")
        key = key.strip()
        if key == "diffuse":
            expr = body.strip()
            diffuse = lambda x, expr=expr: np.real(eval_expr(expr, x=x))  # noqa: E731
        elif key == "atoms":
            for item in filter(None, (t.strip() for t in body.split(","))):
                a, sep, b = item.partition("->")
                if not sep:
                    raise ValueError(f"atom image {item!r} needs the form a->b")
                atoms[a.strip()] = b.strip()
        elif key == "refine":
            refine = int(body)
        else:
            raise ValueError(f"unknown map key {key!r}")
    return DiscreteMap(source, target, diffuse, atoms, refine)


def _quad(params, allow_equal=False):
    return derive_exponents(parse_exponent(params["p"]), parse_exponent(params["q"]), allow_equal=allow_equal)


def _poisson_density_norm(b: BlaschkeProduct, bins: int, s: float) -> float:
    """``||P_w||_s`` with ``w = b(0)``, from exact bin averages of the Poisson kernel."""
    w = complex(b(0.0))
    edges = 2 * np.pi * np.arange(bins + 1) / bins
    z = np.exp(1j * edges)
    ang = np.unwrap(np.angle((z - w) / (1 - np.conj(w) * z)))
    avg = np.diff(ang) * bins / (2 * np.pi)
    if math.isinf(s):
        return float(avg.max())
    return float(np.mean(avg**s)) ** (1.0 / s)


def run_compo(params) -> list:
    quad = _quad(params)
    phi = parse_map(params["map"])
    bins = int(params["grid"] or 1024)
    seed = int(params["seed"])
    dens = pushforward_density(phi, bins=bins, samples=int(params["samples"]), seed=seed)
    est = essnorm_composition(dens, quad)
    oracle = None
    if isinstance(phi, BlaschkeProduct):
        oracle = _poisson_density_norm(phi, bins, quad.s) ** (1.0 / quad.q)
    tol = params["tol"]
    if tol is None:
        tol = 1e-9 if dens.provenance.get("kind") == "analytic" else 0.03 * max(est.lower, 1e-300)
    return [
        ResultRow(params["name"] or "compo", "composition", "||C_phi||_e", est.lower, est.upper, oracle,
                  seed=seed, tol=float(tol), witness={"density": dens.provenance, "mass": dens.mass()})
    ]


def run_mult(params) -> list:
    quad = _quad(params)
    space = MeasureSpace.parse(params["space"])
    u = GridFunction.parse(space, params["u"])
    est = multiplier_essnorm(u, quad)
    oracle = None
    if space.ncells and quad.p > quad.q:
        level = int(params["window"].split(":")[0]) if params["window"] else min(4, space.level)
        w = sign_witness(u, quad, level)
        ug = u.on(w.space) * w.g
        den = lp_norm(w.g, quad.p)
        oracle = lp_norm(ug, quad.q) / den if den > 0 else 0.0
    tol = float(params["tol"] if params["tol"] is not None else 1e-9 * max(1.0, est.upper))
    return [ResultRow(params["name"] or "mult", "multiplier", "||M_u||_e", est.lower, est.upper, oracle,
                      seed=int(params["seed"]), tol=tol, witness={"method": est.method})]


def run_mult_smallp(params) -> list:
    quad = _quad(params)
    space = MeasureSpace.parse(params["space"])
    u = GridFunction.parse(space, params["u"])
    est = multiplier_essnorm_smallp(u, quad, parse_window(params["window"]))
    start, stop = est.notes["window"]
    m = space.atom_masses[start:stop]
    asc = operator_norm_ascent(np.diag(np.abs(u.atomic_values[start:stop])), quad, domain_weights=m, range_weights=m)
    tol = float(params["tol"] if params["tol"] is not None else 1e-6)
    return [ResultRow(params["name"] or "mult-smallp", "multiplier-small-p", "||M_u||_e", est.lower, est.upper,
                      asc.value, seed=int(params["seed"]), tol=tol,
                      witness={"window": [start, stop], "ascent_converged": asc.converged})]


def run_dirichlet(params) -> list:
    p, q = parse_exponent(params["p"]), parse_exponent(params["q"])
    quad = derive_exponents(p, q, allow_equal=(p == q))
    D = DirichletPolynomial.parse(params["u"])
    grid = int(params["grid"]) if params["grid"] else None
    est = multiplier_essnorm_dirichlet(D, quad, grid=grid)
    oracle = None
    if quad.p_finite and p > q:
        oracle = hp_norm_dirichlet(D, quad.r, method="ergodic")
        tol = 0.01 * est.upper
    elif not quad.p_finite and q == 2:
        oracle = hp_norm_dirichlet(D, 2, method="parseval")
        tol = 1e-12 * max(1.0, est.upper)
    else:
        tol = None
    if params["tol"] is not None:
        tol = float(params["tol"])
    return [ResultRow(params["name"] or "dirichlet", "dirichlet-multiplier", "||M_D||_e", est.lower, est.upper,
                      oracle, seed=int(params["seed"]), tol=tol, witness={"D": D.format(), **est.notes})]


def run_inclusion(params) -> list:
    quad = _quad(params)
    grid = int(params["grid"] or 1024)
    mu = parse_carleson(params["mu"], grid)
    est = inclusion_essnorm(mu, quad)
    oracle = 0.0
    if mu.boundary_density is not None and np.any(mu.boundary_density > 0):
        _, val = superinner_sup_realize(mu.boundary_density, quad)
        oracle = val ** (1.0 / quad.q)
    tol = float(params["tol"] if params["tol"] is not None else 1e-9 * max(1.0, est.upper))
    return [ResultRow(params["name"] or "inclusion", "inclusion", "||J_mu||_e", est.lower, est.upper, oracle,
                      seed=int(params["seed"]), tol=tol, witness={"interior_points": len(mu.interior)})]


def run_wco(params) -> list:
    quad = _quad(params)
    src = MeasureSpace.parse(params["space"])
    tgt = MeasureSpace.parse(params["target"]) if params["target"] else src
    phi = parse_discrete_map(params["map"], src, tgt)
    u = GridFunction.parse(src, params["u"] or "1")
    est = wco_essnorm(phi, u, quad)
    wp = est.witness
    rng = np.random.default_rng(int(params["seed"]))
    gap = 0.0
    for _ in range(20):
        f = GridFunction(tgt, rng.standard_normal(tgt.natoms), rng.standard_normal(tgt.ncells))
        gap = max(gap, wp.isometry_gap(f, u))
    seed = int(params["seed"])
    name = params["name"] or "wco"
    return [
        ResultRow(name, "weighted-composition", "||uC_phi||_e", est.lower, est.upper, None, seed=seed,
                  witness={"F_diffuse_min": float(np.abs(wp.F.diffuse_values).min()) if tgt.ncells else None}),
        ResultRow(name, "weighted-composition", "isometry gap (20 random f)", gap, gap, 0.0, seed=seed, tol=1e-9),
    ]


RUNNERS = {
    "compo": run_compo,
    "mult": run_mult,
    "mult-smallp": run_mult_smallp,
    "dirichlet": run_dirichlet,
    "inclusion": run_inclusion,
    "wco": run_wco,
}


def run_scenario(kind: str, params: dict) -> list:
    full = dict(DEFAULTS)
    full.update({k: v for k, v in params.items() if v is not None})
    missing = [k for k in REQUIRED[kind] if full.get(k) is None]
    if missing:
        raise ValueError(f"scenario {kind!r} is missing {', '.join(missing)}")
    if kind == "verify":
        from .verify import run_suite

        return run_suite(full["suite"], int(full["seed"]))
    t0 = time.perf_counter()
    rows = RUNNERS[kind](full)
    ms = (time.perf_counter() - t0) * 1000.0
    for r in rows:
        r.runtime_ms = ms / len(rows)
        r.finalize()
    return rows
