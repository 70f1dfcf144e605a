"""Shared model objects: physical parameters, grids, sampled fields and states.

Conventions
-----------
Natural units are hbar = 1, omega = 1 and a reduced mass of 1, which means the
default particle masses are m1 = m2 = 2.

Grid nodes are stored row-major with axis 1 slowest, so a flattened field
iterates x1 in the outer loop and x3 in the inner loop.

Two field containers exist.  ``ComplexField`` holds dense samples and is
what :func:`sample` returns.  ``SeparableField`` holds a sum of products of
per-axis factors; it is what the 3D residual machinery works with, because a
321**3 grid does not fit in memory while its per-axis factors are a few
kilobytes.  Both carry a ``margin`` (nodes at each end of every axis whose
values are stencil sentinels and must not enter any norm).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

EPS_NODE = 1e-12
LOG_EPS_NODE = math.log(EPS_NODE)


class EntangleError(Exception):
    """Base class for errors raised by this package."""


class DomainError(EntangleError, ValueError):
    """An input lies outside the domain of an operation."""


class SingularityError(DomainError):
    """The reference state is too close to a node for the map to be defined."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class EvaluationError(EntangleError, ArithmeticError):
    """A sampled function produced a non-finite value."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConvergenceError(EntangleError, ArithmeticError):
    """An iterative solver hit its iteration cap."""


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class SystemParams:
    m1: float
    m2: float
    hbar: float = 1.0
    omega: float = 1.0
    m_c: float = field(init=False)
    m_r: float = field(init=False)

    def __post_init__(self):
        for name in ("m1", "m2", "hbar", "omega"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
        m_c = self.m1 + self.m2
        object.__setattr__(self, "m_c", m_c)
        object.__setattr__(self, "m_r", self.m1 * self.m2 / m_c)

    @property
    def oscillator_scale(self) -> float:
        """m_r * omega / hbar, the inverse squared oscillator length."""
        return self.m_r * self.omega / self.hbar

    def summary(self) -> dict:
        return {
            "m1": self.m1,
            "m2": self.m2,
            "hbar": self.hbar,
            "omega": self.omega,
            "m_c": self.m_c,
            "m_r": self.m_r,
        }


def make_system(m1=2.0, m2=2.0, hbar=1.0, omega=1.0) -> SystemParams:
    """Build a validated :class:`SystemParams`; defaults are natural units."""
    return SystemParams(float(m1), float(m2), float(hbar), float(omega))


NATURAL = make_system()


def com_split(x1, x2, params: SystemParams):
    """Center-of-mass and relative positions of a particle pair."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    X = (params.m1 * x1 + params.m2 * x2) / params.m_c
    return X, x1 - x2


def com_join(X, x, params: SystemParams):
    """Inverse of :func:`com_split`."""
    X = np.asarray(X, dtype=float)
    x = np.asarray(x, dtype=float)
    x1 = X + (params.m2 / params.m_c) * x
    x2 = X - (params.m1 / params.m_c) * x
    return x1, x2


@dataclass(frozen=True)
class QuantumNumbers:
    l1: int
    l2: int = 0
    l3: int = 0

    def __post_init__(self):
        for name in ("l1", "l2", "l3"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def n(self) -> int:
        return self.l1 + self.l2 + self.l3

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.l1, self.l2, self.l3)

    def shifted(self, axis: int, step: int) -> "QuantumNumbers | None":
        """Quantum numbers with ``l_axis`` moved by ``step``; None below zero."""
        ls = list(self.as_tuple())
        ls[axis - 1] += step
        if ls[axis - 1] < 0:
            return None
        return QuantumNumbers(*ls)

    @property
    def label(self) -> str:
        return "{},{},{}".format(*self.as_tuple())

    @classmethod
    def parse(cls, text: str) -> "QuantumNumbers":
        parts = [p.strip() for p in str(text).split(",") if p.strip()]
        if not 1 <= len(parts) <= 3:
            raise DomainError(f"expected one to three comma-separated integers, got {text!r}")
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise DomainError(f"quantum numbers must be integers, got {text!r}") from None
        return cls(*values)


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class Grid:
    dim: int
    extent: tuple[float, ...]
    spacing: tuple[float, ...]
    points: tuple[int, ...]

    def axis(self, i: int) -> np.ndarray:
        """Node coordinates along axis ``i`` (0-based)."""
        half = self.points[i] // 2
        return np.arange(-half, half + 1, dtype=float) * self.spacing[i]

    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(self.axis(i) for i in range(self.dim))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def h(self) -> float:
        return self.spacing[0]

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (size, dim), row-major with axis 1 slowest."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def summary(self) -> dict:
        return {
            "dim": self.dim,
            "extent": list(self.extent),
            "spacing": list(self.spacing),
            "points": list(self.points),
        }


def _per_axis(value, dim, name):
    if np.ndim(value) == 0:
        return (float(value),) * dim
    values = tuple(float(v) for v in value)
    if len(values) != dim:
        raise DomainError(f"{name} needs {dim} entries, got {len(values)}")
    return values


def make_grid(extent, spacing, dim: int = 1) -> Grid:
    """Symmetric node grid with an odd count per axis, so the origin is a node."""
    if dim not in (1, 2, 3):
        raise DomainError(f"dim must be 1, 2 or 3, got {dim!r}")
    extent = _per_axis(extent, dim, "extent")
    spacing = _per_axis(spacing, dim, "spacing")
    points = []
    for e, h in zip(extent, spacing):
        if not (e > 0 and h > 0 and math.isfinite(e) and math.isfinite(h)):
            raise DomainError(f"extent and spacing must be positive, got {e!r}, {h!r}")
        ratio = e / h
        half = round(ratio)
        if abs(ratio - half) > 1e-9 * max(1.0, ratio):
            raise DomainError(f"extent {e!r} is not a whole number of spacings {h!r}")
        # stencils check their own width, so small grids are allowed here
        if half < 1:
            raise DomainError(f"extent/spacing must be at least 1, got {ratio:g}")
        points.append(2 * half + 1)
    return Grid(dim, extent, spacing, tuple(points))


# ---------------------------------------------------------------------------
# fields


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    values: np.ndarray
    margin: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.grid.size:
            raise DomainError(f"field has {values.size} samples, grid has {self.grid.size} nodes")
        values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise EvaluationError("field contains non-finite samples")
        object.__setattr__(self, "values", values)

    def interior(self) -> np.ndarray:
        m = self.margin
        if m == 0:
            return self.values
        return self.values[(slice(m, -m),) * self.grid.dim]

    def __add__(self, other):
        if isinstance(other, SeparableField):
            other = other.to_dense()
        return ComplexField(self.grid, self.values + other.values, max(self.margin, other.margin))

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return ComplexField(self.grid, scalar * self.values, self.margin)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def to_dense(self) -> "ComplexField":
        return self


def _factor_key(arr: np.ndarray) -> bytes:
    return hashlib.blake2b(np.ascontiguousarray(arr).tobytes(), digest_size=16).digest()


@dataclass(frozen=True, eq=False)
class SeparableField:
    """Sum over terms of ``coef * outer(factors)``.

    Scalars live in ``coefs`` rather than in a factor so that scaled copies of
    a term still share their factors and merge in ``compress``.
    """

    grid: Grid
    terms: tuple[tuple[np.ndarray, ...], ...]
    margin: int = 0
    coefs: tuple[complex, ...] | None = None

    def __post_init__(self):
        terms = []
        for term in self.terms:
            if len(term) != self.grid.dim:
                raise DomainError("term rank does not match grid dimension")
            factors = []
            for i, f in enumerate(term):
                f = np.asarray(f, dtype=complex)
                if f.shape != (self.grid.points[i],):
                    raise DomainError(f"factor {i} has shape {f.shape}, expected ({self.grid.points[i]},)")
                if not np.all(np.isfinite(f)):
                    raise EvaluationError(f"non-finite samples in factor along axis {i + 1}")
                factors.append(f)
            terms.append(tuple(factors))
        coefs = self.coefs
        if coefs is None:
            coefs = (1.0 + 0j,) * len(terms)
        if len(coefs) != len(terms):
            raise DomainError("one coefficient per term is required")
        object.__setattr__(self, "terms", tuple(terms))
        object.__setattr__(self, "coefs", tuple(complex(c) for c in coefs))

    @classmethod
    def product(cls, grid: Grid, factors: Sequence[np.ndarray], margin: int = 0) -> "SeparableField":
        return cls(grid, (tuple(factors),), margin)

    @classmethod
    def zeros(cls, grid: Grid) -> "SeparableField":
        return cls(grid, ())

    @property
    def rank(self) -> int:
        return len(self.terms)

    def scaled_terms(self):
        """Terms with the coefficient folded into the first factor."""
        return [(c * t[0],) + t[1:] for c, t in zip(self.coefs, self.terms)]

    def with_margin(self, margin: int) -> "SeparableField":
        return replace(self, margin=max(self.margin, margin))

    def __add__(self, other):
        if isinstance(other, ComplexField):
            return self.to_dense() + other
        if other.grid != self.grid:
            raise DomainError("fields live on different grids")
        return SeparableField(self.grid, self.terms + other.terms, max(self.margin, other.margin),
                              self.coefs + other.coefs).compress()

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if scalar == 0:
            return SeparableField(self.grid, (), self.margin)
        return SeparableField(self.grid, self.terms, self.margin, tuple(scalar * c for c in self.coefs))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def map_axis(self, axis: int, fn: Callable[[np.ndarray], np.ndarray], margin: int = 0) -> "SeparableField":
        """Apply a linear 1D map to the ``axis`` factor of every term (0-based axis)."""
        terms = []
        for t in self.terms:
            t = list(t)
            t[axis] = fn(t[axis])
            terms.append(tuple(t))
        return SeparableField(self.grid, tuple(terms), self.margin + margin, self.coefs).compress()

    def multiply_axis(self, axis: int, weights: np.ndarray) -> "SeparableField":
        """Pointwise product with a function of one coordinate."""
        return self.map_axis(axis, lambda f: weights * f)

    def multiply_sum(self, weights: Sequence[np.ndarray]) -> "SeparableField":
        """Pointwise product with ``sum_j w_j(x_j)``."""
        out = SeparableField(self.grid, (), self.margin)
        for axis, w in enumerate(weights):
            out = out + self.multiply_axis(axis, w)
        return out

    def compress(self) -> "SeparableField":
        """Merge terms that agree on every factor but one."""
        if len(self.terms) < 2:
            return self
        terms = [[c, *t] for c, t in zip(self.coefs, self.terms)]
        dim = self.grid.dim
        for axis in range(dim):
            merged: dict[bytes, list] = {}
            order = []
            for t in terms:
                key = b"".join(_factor_key(t[1 + j]) for j in range(dim) if j != axis)
                if key in merged:
                    m = merged[key]
                    if m[0] == t[0]:
                        m[1 + axis] = m[1 + axis] + t[1 + axis]
                    else:
                        m[1 + axis] = m[0] * m[1 + axis] + t[0] * t[1 + axis]
                        m[0] = 1.0 + 0j
                else:
                    merged[key] = list(t)
                    order.append(key)
            terms = [merged[k] for k in order]
        terms = [t for t in terms if t[0] != 0 and all(np.any(f != 0) for f in t[1:])]
        return SeparableField(self.grid, tuple(tuple(t[1:]) for t in terms), self.margin,
                              tuple(t[0] for t in terms))

    def to_dense(self) -> ComplexField:
        values = np.zeros(self.grid.shape, dtype=complex)
        for t in self.scaled_terms():
            values += _outer(t)
        return ComplexField(self.grid, values, self.margin)

    @property
    def values(self) -> np.ndarray:
        return self.to_dense().values


def _outer(factors):
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return out


# ---------------------------------------------------------------------------
# norms over the admissible node set


@dataclass(frozen=True, eq=False)
class NodeMask:
    """Nodes that enter norms.

    A node is admitted when it is at least ``margin`` nodes from every edge,
    every per-axis ``keep`` flag is set, and, if ``log_amplitude`` is given,
    ``sum_j log_amplitude[j][i_j] >= log_floor``.  The last condition is how
    nodes where the reference amplitude drops below ``EPS_NODE`` are removed.
    """

    margin: int = 0
    keep: tuple[np.ndarray, ...] | None = None
    log_amplitude: tuple[np.ndarray, ...] | None = None
    log_floor: float = LOG_EPS_NODE

    def with_margin(self, margin: int) -> "NodeMask":
        return replace(self, margin=max(self.margin, margin))

    def selectors(self, grid: Grid) -> list[np.ndarray]:
        sel = []
        for i in range(grid.dim):
            s = np.zeros(grid.points[i], dtype=bool)
            m = self.margin
            s[m: grid.points[i] - m] = True
            if self.keep is not None:
                s &= self.keep[i]
            sel.append(s)
        return sel

    def dense(self, grid: Grid) -> np.ndarray:
        sel = self.selectors(grid)
        mask = _outer([s.astype(float) for s in sel]) > 0
        if self.log_amplitude is not None:
            total = sum(np.reshape(g, (-1,) + (1,) * (grid.dim - 1 - i))
                        for i, g in enumerate(self.log_amplitude))
            mask &= total >= self.log_floor
        return mask


def _restricted(field, mask: NodeMask):
    sel = mask.selectors(field.grid)
    terms = [tuple(f[s] for f, s in zip(t, sel)) for t in field.scaled_terms()]
    logs = None
    if mask.log_amplitude is not None:
        logs = [np.asarray(g)[s] for g, s in zip(mask.log_amplitude, sel)]
    return terms, logs, [int(s.sum()) for s in sel]


def _effective_mask(fields, mask: NodeMask | None) -> NodeMask:
    mask = mask or NodeMask()
    return mask.with_margin(max(f.margin for f in fields))


def inner(a, b, mask: NodeMask | None = None) -> complex:
    """Sum of conj(a) * b over the admitted nodes."""
    mask = _effective_mask((a, b), mask)
    if isinstance(a, SeparableField) and isinstance(b, SeparableField) and a.grid.dim == 3:
        return _separable_inner3(a, b, mask)
    admitted = mask.dense(a.grid)
    return complex(np.sum(np.conj(a.values[admitted]) * b.values[admitted]))


def norm2(a, mask: NodeMask | None = None) -> float:
    return max(0.0, float(inner(a, a, mask).real))


def max_abs(a, mask: NodeMask | None = None) -> float:
    """Largest modulus over the admitted nodes (exact, also for separable fields)."""
    mask = _effective_mask((a,), mask)
    if isinstance(a, SeparableField) and a.grid.dim >= 2:
        return _separable_max(a, mask)
    admitted = mask.dense(a.grid)
    vals = np.abs(a.values[admitted])
    return float(vals.max()) if vals.size else 0.0


def count(grid: Grid, mask: NodeMask | None = None) -> int:
    ones = SeparableField.product(grid, [np.ones(n) for n in grid.points])
    return int(round(norm2(ones, mask)))


def _tucker_inner(ta, tb) -> complex:
    # Expanding the Gram matrix term by term loses everything below
    # sqrt(machine eps) when large terms cancel.  Projecting every factor onto
    # an orthonormal per-axis basis first keeps the error at eps relative to
    # the terms instead.
    cores = []
    bases = []
    for k in range(3):
        stack = np.array([t[k] for t in ta] + [t[k] for t in tb]).T
        q, _ = np.linalg.qr(stack)
        bases.append(q)
    for terms in (ta, tb):
        core = 0j
        for t in terms:
            c = [bases[k].conj().T @ t[k] for k in range(3)]
            core = core + np.einsum("i,j,k->ijk", *c)
        cores.append(core)
    return complex(np.vdot(cores[0], cores[1]))


def _separable_inner3(a: SeparableField, b: SeparableField, mask: NodeMask) -> complex:
    ta, logs, counts = _restricted(a, mask)
    tb, _, _ = _restricted(b, mask)
    if not ta or not tb or min(counts) == 0:
        return 0j
    total = _tucker_inner(ta, tb)
    if logs is None:
        return total
    # Nodes with g1[i] + g2[j] + g3[k] < floor are subtracted.  Sorting axis 3
    # by g3 turns the rejected k for each (i, j) into a suffix, so suffix sums
    # of the axis-3 products give that sum exactly in O(n1 n2 r^2).
    g1, g2, g3 = logs
    order = np.argsort(-g3, kind="stable")
    g3s = g3[order]
    need = mask.log_floor - (g1[:, None] + g2[None, :])
    kcount = np.searchsorted(-g3s, -need, side="right")
    if np.all(kcount == g3s.size):
        return total
    rejected = 0j
    for p in ta:
        for q in tb:
            prod = np.conj(p[2][order]) * q[2][order]
            suffix = np.concatenate((np.cumsum(prod[::-1])[::-1], [0j]))
            w = np.multiply.outer(np.conj(p[0]) * q[0], np.conj(p[1]) * q[1])
            rejected += np.sum(w * suffix[kcount])
    return complex(total - rejected)


def _separable_max(a: SeparableField, mask: NodeMask) -> float:
    terms, logs, counts = _restricted(a, mask)
    if not terms or min(counts) == 0:
        return 0.0
    dim = a.grid.dim
    lead = np.array([t[0] for t in terms])
    rest = [np.array([t[k] for t in terms]) for k in range(1, dim)]
    if not any(np.iscomplexobj(f) and np.any(f.imag) for f in [lead, *rest]):
        lead, rest = lead.real, [r.real for r in rest]
    stack = _stack_outer(rest).reshape(len(terms), -1)
    # Two upper bounds per slab: the triangle inequality over terms, and the
    # slab's 2-norm from the Gram matrix of the stacked rows, which stays
    # tight when terms cancel.  The Gram route is padded for its rounding.
    scale = np.linalg.norm(stack, axis=1)
    loose = np.abs(lead).T @ scale
    gram = stack.conj() @ stack.T
    sq = np.einsum("pi,pq,qi->i", lead.conj(), gram, lead).real
    bound = np.minimum(loose, np.sqrt(np.maximum(sq, 0.0) + 1e-12 * loose ** 2) * (1 + 1e-12))
    width = np.full(lead.shape[1], stack.shape[1])
    if logs is not None:
        # Columns sorted by falling log-amplitude make the admitted nodes of
        # every slab a prefix, so the mask never has to be materialized.
        rest_log = sum(np.reshape(g, (-1,) + (1,) * (dim - 2 - i)) for i, g in enumerate(logs[1:])).ravel()
        order = np.argsort(-rest_log, kind="stable")
        stack = stack[:, order]
        width = np.searchsorted(-rest_log[order], logs[0] - mask.log_floor, side="right")
    best = 0.0
    # Slabs along axis 1 are visited in order of their upper bound, a batch
    # at a time; once the bound drops below the best value seen, no later
    # slab can beat it.
    visit = np.argsort(-bound, kind="stable")
    visit = visit[width[visit] > 0]
    for start in range(0, visit.size, _MAX_BATCH):
        idx = visit[start:start + _MAX_BATCH]
        if bound[idx[0]] <= best:
            break
        vals = lead[:, idx].T @ stack[:, :width[idx].max()]
        if np.iscomplexobj(vals):
            vals = np.abs(vals)
        for row, w in zip(vals, width[idx]):
            # max |v| of a real row without an abs temporary
            best = max(best, float(row[:w].max()), -float(row[:w].min()))
    return best


_MAX_BATCH = 4


def _stack_outer(rest):
    out = rest[0]
    for r in rest[1:]:
        out = out[..., None] * r[:, None, :]
    return out


# ---------------------------------------------------------------------------
# sampling


def sample(fn, grid: Grid) -> ComplexField:
    """Evaluate ``fn`` on every node.

    ``fn`` is called once with one coordinate array per axis (broadcastable,
    ``indexing="ij"``) and must return an array broadcastable to the grid
    shape.  Wrap a scalar-only function with ``np.vectorize``.
    """
    coords = np.meshgrid(*grid.axes(), indexing="ij", sparse=True)
    with np.errstate(all="ignore"):
        values = np.broadcast_to(np.asarray(fn(*coords), dtype=complex), grid.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.unravel_index(np.flatnonzero(bad)[0], grid.shape)
        node = tuple(float(grid.axis(i)[j]) for i, j in enumerate(idx))
        raise EvaluationError(f"non-finite sample at node {node}", node=node)
    return ComplexField(grid, np.array(values))


def sample_factors(fns: Sequence[Callable], grid: Grid) -> SeparableField:
    """Rank-one separable field with ``fns[j]`` sampled along axis j."""
    if len(fns) != grid.dim:
        raise DomainError(f"need {grid.dim} axis functions, got {len(fns)}")
    factors = []
    for i, fn in enumerate(fns):
        with np.errstate(all="ignore"):
            f = np.asarray(fn(grid.axis(i)), dtype=complex)
        if not np.all(np.isfinite(f)):
            j = int(np.flatnonzero(~np.isfinite(f))[0])
            raise EvaluationError(f"non-finite sample on axis {i + 1} at x={grid.axis(i)[j]}",
                                  node=(i, float(grid.axis(i)[j])))
        factors.append(f)
    return SeparableField.product(grid, factors)


# ---------------------------------------------------------------------------
# states


def _eval_product(fns, x):
    x = np.asarray(x, dtype=float)
    dim = len(fns)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise DomainError(f"points must have {dim} coordinates, got shape {x.shape}")
    out = np.ones(x.shape[:-1], dtype=complex)
    for j, fn in enumerate(fns):
        out = out * fn(x[..., j])
    return out


@dataclass(frozen=True)
class StateSpec:
    """An internal wavefunction given as a product of per-axis factors.

    ``quantum_numbers`` is None for numerically built states.
    """

    quantum_numbers: QuantumNumbers | None
    energy: float
    factors: tuple[Callable[[np.ndarray], np.ndarray], ...]
    label: str = ""

    @property
    def dim(self) -> int:
        return len(self.factors)

    def psi_I(self, x) -> np.ndarray:
        return _eval_product(self.factors, x)

    __call__ = psi_I

    def sample(self, grid: Grid) -> SeparableField:
        if grid.dim != self.dim:
            raise DomainError(f"state is {self.dim}D, grid is {grid.dim}D")
        return sample_factors(self.factors, grid)

    def with_energy(self, energy: float) -> "StateSpec":
        return replace(self, energy=float(energy))


@dataclass(frozen=True)
class ReferenceState:
    """The nodeless eigenstate that defines the entangling map.

    ``log_factors[j]`` returns ln|psi'_j| along axis j directly, so tails never
    underflow; ``log_derivs[j]`` is d/dx_j ln|psi'_j|.  ``log_peak`` is the
    maximum of ln|Psi'_I|, the constant removed when the map is used with the
    normalization dropped.  ``domain`` bounds |x_j| where a numeric reference
    is trusted.
    """

    factors: tuple[Callable, ...]
    log_factors: tuple[Callable, ...]
    log_derivs: tuple[Callable, ...]
    energy_m: float
    log_peak: float
    com_momentum: tuple[float, ...] = (0.0, 0.0, 0.0)
    source: str = "closed-form"
    label: str = ""
    domain: tuple[float, ...] | None = None
    hbar: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.factors)

    def psi_I(self, x) -> np.ndarray:
        return _eval_product(self.factors, x)

    __call__ = psi_I

    def log_abs(self, x) -> np.ndarray:
        return _sum_axes(self.log_factors, x)

    def log_derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return np.stack([fn(x[..., j]) for j, fn in enumerate(self.log_derivs)], axis=-1)

    def as_state(self) -> StateSpec:
        return StateSpec(None, self.energy_m, self.factors, self.label or "reference")

    def node_mask(self, grid: Grid) -> NodeMask:
        """Mask removing nodes where |Psi'_I| < EPS_NODE or outside ``domain``."""
        logs = tuple(np.asarray(fn(grid.axis(j)), dtype=float) for j, fn in enumerate(self.log_factors))
        keep = None
        if self.domain is not None:
            keep = tuple(np.abs(grid.axis(j)) <= self.domain[j] + 1e-12 for j in range(grid.dim))
        return NodeMask(keep=keep, log_amplitude=logs)


def _sum_axes(fns, x):
    x = np.asarray(x, dtype=float)
    dim = len(fns)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise DomainError(f"points must have {dim} coordinates, got shape {x.shape}")
    return sum(np.asarray(fn(x[..., j]), dtype=float) for j, fn in enumerate(fns))


# ---------------------------------------------------------------------------
# reports

REPORT_COLUMNS = ("check_name", "grid_h", "grid_extent", "n", "m",
                  "residual_rms", "residual_max", "tolerance", "pass")


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of one named check; ``passed`` is ``residual_rms <= tolerance``."""

    check_name: str
    h: float
    extent: float
    n: str
    m: str
    residual_rms: float
    residual_max: float
    tolerance: float
    grid: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "residual_rms", float(self.residual_rms))
        object.__setattr__(self, "residual_max", float(self.residual_max))
        object.__setattr__(self, "passed", bool(self.residual_rms <= self.tolerance))

    def row(self) -> list[str]:
        return [
            self.check_name,
            repr(float(self.h)),
            repr(float(self.extent)),
            str(self.n),
            str(self.m),
            repr(self.residual_rms),
            repr(self.residual_max),
            repr(float(self.tolerance)),
            "true" if self.passed else "false",
        ]

    def as_dict(self) -> dict:
        out = dict(zip(REPORT_COLUMNS, self.row()))
        out.update(
            grid_h=float(self.h),
            grid_extent=float(self.extent),
            residual_rms=self.residual_rms,
            residual_max=self.residual_max,
            tolerance=float(self.tolerance),
            grid=self.grid,
            params=self.params,
            notes=self.notes,
        )
        out["pass"] = self.passed
        return out
