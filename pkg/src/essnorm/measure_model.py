"""Finite model of a separable measure space: finitely many atoms plus a
diffuse part discretized on ``2**m`` uniform cells of [0, 1).

The dyadic filtration of [0, 1) plays the role of the approximating
sequence of sets; conditional expectations are block averages.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._expr import eval_expr, parse_complex
from .exponents import ExponentQuad


class MeasureSpace:
    """Atoms ``(label, mass)`` plus a piecewise-constant diffuse density.

    When ``cell_fractions`` is set every cell is split in two sub-cells
    carrying fractions ``f`` and ``1 - f`` of its mass; functions on such a
    space have diffuse values of shape ``(ncells, 2)``.
    """

    def __init__(
        self,
        atoms: Sequence[tuple[str, float]] = (),
        density: Optional[Sequence[float]] = None,
        cell_fractions: Optional[Sequence[float]] = None,
    ):
        atoms = list(atoms)
        self.atom_labels = tuple(str(a) for a, _ in atoms)
        self.atom_masses = np.array([float(m) for _, m in atoms], dtype=np.float64)
        if np.any(self.atom_masses <= 0) or not np.all(np.isfinite(self.atom_masses)):
            raise ValueError("atom masses must be finite and > 0")
        if len(set(self.atom_labels)) != len(self.atom_labels):
            raise ValueError("duplicate atom labels")
        dens = np.zeros(0) if density is None else np.asarray(density, dtype=np.float64).ravel()
        if dens.size:
            m = int(round(math.log2(dens.size)))
            if 2**m != dens.size:
                raise ValueError("diffuse density needs 2**m cells")
            if np.any(dens < 0) or not np.all(np.isfinite(dens)):
                raise ValueError("density must be finite and nonnegative")
        self.density = dens
        if cell_fractions is not None:
            fr = np.asarray(cell_fractions, dtype=np.float64).ravel()
            if fr.shape != dens.shape or np.any(fr < 0) or np.any(fr > 1):
                raise ValueError("cell_fractions must match the cells and lie in [0, 1]")
            self.cell_fractions = fr
        else:
            self.cell_fractions = None

    # -- constructors --------------------------------------------------------

    @classmethod
    def lebesgue(cls, m: int, atoms: Sequence[tuple[str, float]] = ()) -> "MeasureSpace":
        return cls(atoms, np.ones(2**m))

    @classmethod
    def parse(cls, text: str) -> "MeasureSpace":
        """Parse ``atoms: a=0.5,b=0.25; diffuse: m=10, density=<expr|csv>``.

        ``density`` is an expression in ``x`` (evaluated at cell midpoints),
        a comma separated list of ``2**m`` values, or ``csv:<path>``.
        """
        atoms: list[tuple[str, float]] = []
        density = None
        for part in filter(None, (s.strip() for s in text.split(";"))):
            key, _, body = part.partition(":")
            key = key.strip().lower()
            if key == "atoms":
                for item in filter(None, (s.strip() for s in body.split(","))):
                    label, eq, mass = item.partition("=")
                    if not eq:
                        raise ValueError(f"atom entry {item!r} is not label=mass")
                    atoms.append((label.strip(), float(mass)))
            elif key == "diffuse":
                mm = re.search(r"\bm\s*=\s*(\d+)", body)
                dm = re.search(r"density\s*=\s*(.*)$", body)
                if mm is None:
                    raise ValueError("diffuse section needs m=<level>")
                m = int(mm.group(1))
                dexpr = dm.group(1).strip() if dm else "1"
                density = _parse_density(dexpr, m)
            else:
                raise ValueError(f"unknown measure-space section {key!r}")
        return cls(atoms, density)

    # -- geometry -------------------------------------------------------------

    @property
    def ncells(self) -> int:
        return self.density.size

    @property
    def level(self) -> int:
        return int(round(math.log2(self.ncells))) if self.ncells else 0

    @property
    def width(self) -> float:
        return 1.0 / self.ncells if self.ncells else 0.0

    @property
    def natoms(self) -> int:
        return self.atom_masses.size

    @property
    def split(self) -> bool:
        return self.cell_fractions is not None

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.ncells) + 0.5) * self.width

    def cell_masses(self) -> np.ndarray:
        return self.density * self.width

    def diffuse_masses(self) -> np.ndarray:
        """Masses with the same shape as diffuse values of functions on this space."""
        cm = self.cell_masses()
        if self.cell_fractions is None:
            return cm
        f = self.cell_fractions
        return np.stack([cm * f, cm * (1.0 - f)], axis=1)

    @property
    def diffuse_mass(self) -> float:
        return float(self.cell_masses().sum())

    @property
    def total_mass(self) -> float:
        return float(self.atom_masses.sum()) + self.diffuse_mass

    def with_fractions(self, fractions) -> "MeasureSpace":
        return MeasureSpace(zip(self.atom_labels, self.atom_masses), self.density, fractions)

    def unsplit(self) -> "MeasureSpace":
        return MeasureSpace(zip(self.atom_labels, self.atom_masses), self.density)

    def diffuse_only(self) -> "MeasureSpace":
        return MeasureSpace((), self.density, self.cell_fractions)

    def __repr__(self) -> str:
        return f"MeasureSpace(natoms={self.natoms}, ncells={self.ncells}, split={self.split})"


def _parse_density(text: str, m: int) -> np.ndarray:
    n = 2**m
    if text.startswith("csv:"):
        vals = np.loadtxt(text[4:], delimiter=",", dtype=np.float64).ravel()
    elif re.fullmatch(r"[\s0-9eE+.,-]+", text) and "," in text:
        vals = np.array([float(v) for v in text.split(",")])
    else:
        x = (np.arange(n) + 0.5) / n
        vals = np.asarray(eval_expr(text, x=x), dtype=np.float64)
    if vals.size != n:
        raise ValueError(f"density has {vals.size} values, expected {n}")
    return vals


@dataclass
class GridFunction:
    """A function on a :class:`MeasureSpace`: one value per atom and per cell."""

    space: MeasureSpace
    atomic_values: np.ndarray
    diffuse_values: np.ndarray

    def __post_init__(self):
        self.atomic_values = np.asarray(self.atomic_values, dtype=np.complex128).reshape(-1)
        dv = np.asarray(self.diffuse_values, dtype=np.complex128)
        if self.space.split and dv.ndim == 1:
            dv = np.repeat(dv[:, None], 2, axis=1)
        self.diffuse_values = dv
        if self.atomic_values.size != self.space.natoms:
            raise ValueError("atomic_values length does not match the atoms")
        want = self.space.diffuse_masses().shape
        if dv.shape != want:
            raise ValueError(f"diffuse_values shape {dv.shape} does not match {want}")

    @classmethod
    def from_callable(cls, space: MeasureSpace, diffuse=None, atoms=None) -> "GridFunction":
        """Sample ``diffuse(x)`` at cell midpoints; ``atoms`` is a sequence of values."""
        if diffuse is None:
            dv = np.zeros(space.ncells)
        elif callable(diffuse):
            dv = np.asarray(diffuse(space.midpoints()), dtype=np.complex128)
            dv = np.broadcast_to(dv, (space.ncells,))
        else:
            dv = np.asarray(diffuse, dtype=np.complex128)
        av = np.zeros(space.natoms) if atoms is None else np.asarray(atoms)
        return cls(space, av, dv)

    @classmethod
    def parse(cls, space: MeasureSpace, text: str) -> "GridFunction":
        """``<expr in x>[; atoms=v1,v2,...]``; either part may be omitted."""
        diffuse = None
        atoms = None
        for part in filter(None, (s.strip() for s in text.split(";"))):
            if part.startswith("atoms"):
                body = part.split("=", 1)[1] if "=" in part else part.split(":", 1)[1]
                atoms = [parse_complex(v) for v in body.split(",") if v.strip()]
            else:
                expr = part
                diffuse = lambda x, expr=expr: eval_expr(expr, x=x)  # noqa: E731
        if atoms is None:
            atoms = np.zeros(space.natoms)
        return cls.from_callable(space, diffuse, atoms)

    def on(self, space: MeasureSpace) -> "GridFunction":
        """Re-home onto ``space`` (same atoms and cells, possibly split)."""
        if space.ncells != self.space.ncells or space.natoms != self.space.natoms:
            raise ValueError("incompatible spaces")
        dv = self.diffuse_values
        if self.space.split and not space.split:
            if not np.allclose(dv[:, 0], dv[:, 1]):
                raise ValueError("function is not constant on cells; cannot unsplit")
            dv = dv[:, 0]
        return GridFunction(space, self.atomic_values, dv)

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            if other.space is not self.space:
                other = other.on(self.space)
            return GridFunction(
                self.space, op(self.atomic_values, other.atomic_values), op(self.diffuse_values, other.diffuse_values)
            )
        return GridFunction(self.space, op(self.atomic_values, other), op(self.diffuse_values, other))

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __abs__(self):
        return GridFunction(self.space, np.abs(self.atomic_values), np.abs(self.diffuse_values))

    def diffuse_part(self) -> "GridFunction":
        return GridFunction(self.space, np.zeros(self.space.natoms), self.diffuse_values)

    def atomic_part(self) -> "GridFunction":
        return GridFunction(self.space, self.atomic_values, np.zeros_like(self.diffuse_values))

    def integral(self) -> complex:
        return complex(
            np.sum(self.atomic_values * self.space.atom_masses)
            + np.sum(self.diffuse_values * self.space.diffuse_masses())
        )


@dataclass(frozen=True)
class DyadicAlgebra:
    """Algebra generated by the ``2**level`` dyadic blocks of [0,1) and the atoms."""

    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")


def lp_norm(f: GridFunction, p: float) -> float:
    """L^p norm on the model; ``p = inf`` is the max modulus on the support."""
    sp = f.space
    if math.isinf(p):
        vals = [np.abs(f.atomic_values)[sp.atom_masses > 0], np.abs(f.diffuse_values)[sp.diffuse_masses() > 0]]
        vals = np.concatenate([v.ravel() for v in vals])
        return float(vals.max()) if vals.size else 0.0
    if p < 1:
        raise ValueError("p must be >= 1")
    total = np.sum(np.abs(f.atomic_values) ** p * sp.atom_masses) + np.sum(
        np.abs(f.diffuse_values) ** p * sp.diffuse_masses()
    )
    return float(total) ** (1.0 / p)


def _blocks(arr: np.ndarray, level: int) -> np.ndarray:
    return arr.reshape((2**level, -1) + arr.shape[1:])


def conditional_expectation(f: GridFunction, alg) -> GridFunction:
    """Block averages of ``f`` over the level-n dyadic blocks; atoms are fixed.

    Blocks of zero mass map to 0.
    """
    level = alg.level if isinstance(alg, DyadicAlgebra) else int(alg)
    sp = f.space
    if sp.ncells == 0:
        return GridFunction(sp, f.atomic_values, f.diffuse_values)
    if level > sp.level:
        raise ValueError(f"level {level} exceeds grid level {sp.level}")
    w = _blocks(sp.diffuse_masses(), level)
    v = _blocks(f.diffuse_values, level)
    axes = tuple(range(1, w.ndim))
    mass = w.sum(axis=axes)
    num = (v * w).sum(axis=axes)
    mean = np.where(mass > 0, num / np.where(mass > 0, mass, 1.0), 0.0)
    out = np.broadcast_to(mean.reshape((-1,) + (1,) * (w.ndim - 1)), w.shape).reshape(f.diffuse_values.shape)
    return GridFunction(sp, f.atomic_values, out)


@dataclass
class HalvingSplit:
    """Per-cell membership fractions of the two halves (they sum to the cell set)."""

    first: np.ndarray
    second: np.ndarray
    split_point: float
    degenerate: bool = False
    boundary_cell: Optional[int] = None


def halving_split(cells, weight: GridFunction) -> HalvingSplit:
    """Split ``cells`` (index range, index array or mask) into a left and a right
    part of equal ``∫ weight dμ``; one boundary cell is assigned fractionally.
    """
    sp = weight.space
    if sp.split:
        raise ValueError("halving_split needs an unsplit space")
    idx = _cell_index(cells, sp.ncells)
    first = np.zeros(sp.ncells)
    second = np.zeros(sp.ncells)
    if idx.size == 0:
        return HalvingSplit(first, second, float("nan"), degenerate=True)
    w = np.real(weight.diffuse_values[idx]) * sp.cell_masses()[idx]
    if np.any(w < 0):
        raise ValueError("splitting weight must be nonnegative")
    total = float(w.sum())
    if total <= 0:
        first[idx] = 1.0
        return HalvingSplit(first, second, float((idx[-1] + 1) * sp.width), degenerate=True)
    cum = np.cumsum(w)
    target = 0.5 * total
    k = int(np.searchsorted(cum, target, side="left"))
    before = cum[k - 1] if k > 0 else 0.0
    frac = (target - before) / w[k]
    frac = min(max(frac, 0.0), 1.0)
    first[idx[:k]] = 1.0
    second[idx[k + 1 :]] = 1.0
    first[idx[k]] = frac
    second[idx[k]] = 1.0 - frac
    split_point = (idx[k] + frac) * sp.width
    return HalvingSplit(first, second, float(split_point), degenerate=False, boundary_cell=int(idx[k]))


def _cell_index(cells, n: int) -> np.ndarray:
    if isinstance(cells, range) or isinstance(cells, slice):
        return np.arange(n)[cells] if isinstance(cells, slice) else np.asarray(cells, dtype=np.int64)
    arr = np.asarray(cells)
    if arr.dtype == bool:
        if arr.size != n:
            raise ValueError("cell mask has the wrong length")
        return np.flatnonzero(arr)
    return np.sort(arr.astype(np.int64))


@dataclass
class SignWitness:
    """Sign-alternating witness ``g_n`` and the split space it lives on."""

    g: GridFunction
    level: int
    degenerate_blocks: list = field(default_factory=list)

    @property
    def space(self) -> MeasureSpace:
        return self.g.space


def sign_witness(u: GridFunction, quad: ExponentQuad, level: int) -> SignWitness:
    """Build the witness ``g_n`` that cancels on every level-``n`` dyadic block.

    Finite ``p``: ``g = ±|u|^{r/p}`` with halves of equal ``∫|u|^{r/p}``, so
    ``∫_C g dμ = 0``.  ``p = inf``: ``g = ±conj(sgn u)`` with halves of equal
    ``∫|u|``, so ``∫_C u g dμ = 0``.  Zero on atoms.
    """
    sp = u.space.unsplit() if u.space.split else u.space
    u = u.on(sp) if u.space.split else u
    if quad.p <= quad.q:
        raise ValueError("sign_witness needs p > q")
    if sp.ncells == 0:
        raise ValueError("sign_witness needs a diffuse part")
    if level > sp.level:
        raise ValueError("level exceeds grid level")
    au = np.abs(u.diffuse_values)
    if quad.p_finite:
        w = au ** (quad.r / quad.p)
        mag = w
        phase = np.ones(sp.ncells, dtype=np.complex128)
    else:
        w = au
        mag = np.ones(sp.ncells)
        phase = np.where(au > 0, np.conj(u.diffuse_values) / np.where(au > 0, au, 1.0), 1.0)
    weight = GridFunction(sp, np.zeros(sp.natoms), w)
    fractions = np.ones(sp.ncells)
    sign0 = np.ones(sp.ncells)
    sign1 = np.ones(sp.ncells)
    bsize = sp.ncells // 2**level
    degenerate = []
    for b in range(2**level):
        cells = range(b * bsize, (b + 1) * bsize)
        hs = halving_split(cells, weight)
        if hs.degenerate:
            degenerate.append(b)
            continue
        sl = slice(b * bsize, (b + 1) * bsize)
        left = hs.first[sl] == 1.0
        sign0[sl] = np.where(left, 1.0, -1.0)
        sign1[sl] = sign0[sl]
        k = hs.boundary_cell
        fractions[k] = hs.first[k]
        sign0[k] = 1.0
        sign1[k] = -1.0
    split_space = sp.with_fractions(fractions)
    base = mag * phase
    dv = np.stack([base * sign0, base * sign1], axis=1)
    g = GridFunction(split_space, np.zeros(sp.natoms), dv)
    return SignWitness(g, level, degenerate)


def tail_truncation(u: GridFunction, n: int) -> GridFunction:
    """Keep the first ``n`` atoms of ``u``; zero on later atoms and on the diffuse part."""
    if n < 0:
        raise ValueError("n must be >= 0")
    av = np.array(u.atomic_values)
    av[n:] = 0
    return GridFunction(u.space, av, np.zeros_like(u.diffuse_values))
