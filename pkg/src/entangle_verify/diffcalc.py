"""Finite differences and the derivative operators of the entangled coordinates.

For a stationary state the time derivative is ``-i E / hbar`` times the
state, so the operator along z_i reduces to ``d/dx_i - L_i`` and the one
along z_i* to ``d/dx_i + L_i`` with ``L_i = d/dx_i ln Psi'_I``.  The
reduction is carried out with the energies kept symbolic in the arithmetic
(``-i L (hbar / E_map) (-i E_state / hbar)``) so that the cancellation of E
is something the code does, not something it assumes.

The log-derivative of the reference can be taken in two ways:

``"sampled"`` (default)
    ``L_i = (D_i Psi') / Psi'`` with the same stencil that differentiates the
    state.  The lowering operator then annihilates the reference exactly on
    the grid, the discrete counterpart of the continuum identity.
``"closed"``
    The reference's own ``log_derivs`` callables (closed form for the
    oscillator, interpolated for numeric references).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core_model import (
    ComplexField,
    DomainError,
    Grid,
    ReferenceState,
    ResidualReport,
    SeparableField,
    StateSpec,
    SystemParams,
    inner,
    max_abs,
    norm2,
)

LOG_DERIVATIVE_MODES = ("sampled", "closed")

_COEFFS = {
    (1, 2): np.array([-0.5, 0.0, 0.5]),
    (2, 2): np.array([1.0, -2.0, 1.0]),
    (1, 4): np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]),
    (2, 4): np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]),
}


@dataclass(frozen=True)
class StencilSpec:
    order: int = 4
    axis: int = 1
    derivative: int = 1

    def __post_init__(self):
        if self.order not in (2, 4):
            raise DomainError(f"stencil order must be 2 or 4, got {self.order!r}")
        if self.derivative not in (1, 2):
            raise DomainError(f"derivative must be 1 or 2, got {self.derivative!r}")
        if self.axis not in (1, 2, 3):
            raise DomainError(f"axis must be 1, 2 or 3, got {self.axis!r}")

    @property
    def margin(self) -> int:
        return self.order // 2


def stencil_1d(values: np.ndarray, h: float, order: int = 4, derivative: int = 1, axis: int = -1) -> np.ndarray:
    """Central difference along ``axis``; the ``order/2`` edge nodes are set to 0."""
    coeffs = _COEFFS[(derivative, order)]
    m = order // 2
    values = np.asarray(values)
    n = values.shape[axis]
    if n < 2 * m + 1:
        raise DomainError(f"need at least {2 * m + 1} nodes for an order-{order} stencil, got {n}")
    moved = np.moveaxis(values, axis, -1)
    out = np.zeros_like(moved, dtype=np.result_type(moved, float))
    acc = out[..., m:n - m]
    for k, c in enumerate(coeffs):
        if c != 0.0:
            acc += c * moved[..., k:n - 2 * m + k]
    out /= h ** derivative
    return np.moveaxis(out, -1, axis)


def fd_derivative(field, spec: StencilSpec):
    """Central-difference derivative of a dense or separable field."""
    grid = field.grid
    if spec.axis > grid.dim:
        raise DomainError(f"axis {spec.axis} does not exist on a {grid.dim}D grid")
    i = spec.axis - 1
    h = grid.spacing[i]
    if isinstance(field, SeparableField):
        return field.map_axis(i, lambda f: stencil_1d(f, h, spec.order, spec.derivative), margin=spec.margin)
    values = stencil_1d(field.values, h, spec.order, spec.derivative, axis=i)
    return ComplexField(grid, values, field.margin + spec.margin)


# ---------------------------------------------------------------------------
# reference log-derivative on a grid


def _check_mode(mode):
    if mode not in LOG_DERIVATIVE_MODES:
        raise DomainError(f"log_derivative must be one of {LOG_DERIVATIVE_MODES}, got {mode!r}")


def reference_log_derivative(reference: ReferenceState, grid: Grid, order: int = 4,
                             mode: str = "sampled") -> tuple[list[np.ndarray], int]:
    """Per-axis samples of L_j and the margin they carry."""
    _check_mode(mode)
    if reference.dim != grid.dim:
        raise DomainError(f"reference is {reference.dim}D, grid is {grid.dim}D")
    out = []
    for j in range(grid.dim):
        x = grid.axis(j)
        if mode == "closed":
            out.append(np.asarray(reference.log_derivs[j](x), dtype=float))
            continue
        logs = np.asarray(reference.log_factors[j](x), dtype=float)
        # Rescaling by the peak cancels in D(psi)/psi and keeps the tails representable.
        psi = np.exp(logs - logs.max())
        d = stencil_1d(psi, grid.spacing[j], order, 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ld = np.where(psi > 0, d / psi, 0.0)
        out.append(ld)
    return out, (0 if mode == "closed" else order // 2)


def reference_curvature(reference: ReferenceState, grid: Grid, order: int = 4) -> list[np.ndarray]:
    """Per-axis samples of (d^2 psi'_j / dx_j^2) / psi'_j."""
    out = []
    for j in range(grid.dim):
        logs = np.asarray(reference.log_factors[j](grid.axis(j)), dtype=float)
        psi = np.exp(logs - logs.max())
        d2 = stencil_1d(psi, grid.spacing[j], order, 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            out.append(np.where(psi > 0, d2 / psi, 0.0))
    return out


# ---------------------------------------------------------------------------
# entangled derivatives


def _with_margin(field: SeparableField, margin: int) -> SeparableField:
    return field.with_margin(margin)


def _map_energies(e_state: float, energy: float | None) -> tuple[float, float]:
    e_map = e_state if energy is None else energy
    if e_map == 0:
        if e_state != 0:
            raise DomainError("the entangled derivative needs a non-zero map energy")
        # E = 0 with a consistent map: only the ratio E_state/E_map = 1 survives.
        return 1.0, 1.0
    return e_state, e_map


def _entangled_derivative(field: SeparableField, L: list[np.ndarray], L_margin: int, axis: int, order: int,
                          conjugate: bool, e_state: float, e_map: float, hbar: float) -> SeparableField:
    i = axis - 1
    h = field.grid.spacing[i]
    dx = field.map_axis(i, lambda f: stencil_1d(f, h, order, 1), margin=order // 2)
    dt = -1j * e_state / hbar
    chain = (1j if conjugate else -1j) * (hbar / e_map) * dt
    return _with_margin(dx + chain * field.multiply_axis(i, L[i]), field.margin + L_margin)


def _setup(state: StateSpec, reference: ReferenceState, grid: Grid, order: int, mode: str):
    if state.dim != reference.dim or state.dim != grid.dim:
        raise DomainError("state, reference and grid must share one dimension")
    L, L_margin = reference_log_derivative(reference, grid, order, mode)
    return state.sample(grid), L, L_margin


def d_dz(state: StateSpec, reference: ReferenceState, axis: int, grid: Grid, order: int = 4,
         energy: float | None = None, log_derivative: str = "sampled") -> SeparableField:
    """(d/dz_i) Psi_I on ``grid``.  ``energy`` is the E of the map; default the state's energy."""
    field, L, Lm = _setup(state, reference, grid, order, log_derivative)
    e_state, e_map = _map_energies(state.energy, energy)
    return _entangled_derivative(field, L, Lm, axis, order, False, e_state, e_map, reference.hbar)


def d_dz_conj(state: StateSpec, reference: ReferenceState, axis: int, grid: Grid, order: int = 4,
              energy: float | None = None, log_derivative: str = "sampled") -> SeparableField:
    """(d/dz_i*) Psi_I on ``grid``."""
    field, L, Lm = _setup(state, reference, grid, order, log_derivative)
    e_state, e_map = _map_energies(state.energy, energy)
    return _entangled_derivative(field, L, Lm, axis, order, True, e_state, e_map, reference.hbar)


@dataclass(frozen=True)
class MixedSecond:
    field: SeparableField
    identity_field: SeparableField
    max_discrepancy: float


def _composition(field, L, Lm, order, e_state, e_map, hbar, axes):
    total = SeparableField(field.grid, (), 0)
    for axis in axes:
        u = _entangled_derivative(field, L, Lm, axis, order, False, e_state, e_map, hbar)
        v = _entangled_derivative(u, L, Lm, axis, order, True, e_state, e_map, hbar)
        total = total + v
    return total


def _identity_route(field, curvature, order):
    total = SeparableField(field.grid, (), 0)
    for i in range(field.grid.dim):
        h = field.grid.spacing[i]
        d2 = field.map_axis(i, lambda f: stencil_1d(f, h, order, 2), margin=order // 2)
        total = total + d2 - field.multiply_axis(i, curvature[i])
    return _with_margin(total, field.margin + order // 2)


def mixed_second(state: StateSpec, reference: ReferenceState, grid: Grid, order: int = 4,
                 log_derivative: str = "sampled") -> MixedSecond:
    """Sum over axes of d^2 Psi / dz_i* dz_i, by operator composition and by the curvature identity.

    The identity route is d^2 Psi/dx_i^2 - (Psi/Psi') d^2 Psi'/dx_i^2.  The
    largest pointwise gap between the routes over the admitted nodes is
    recorded on the result.
    """
    field, L, Lm = _setup(state, reference, grid, order, log_derivative)
    e_state, e_map = _map_energies(state.energy, None)
    composed = _composition(field, L, Lm, order, e_state, e_map, reference.hbar, range(1, grid.dim + 1))
    identity = _identity_route(field, reference_curvature(reference, grid, order), order)
    margin = max(composed.margin, identity.margin)
    gap = max_abs(_with_margin(composed - identity, margin), reference.node_mask(grid))
    return MixedSecond(composed, identity, gap)


# ---------------------------------------------------------------------------
# ladder operators


@dataclass(frozen=True)
class LadderResult:
    field: SeparableField
    coefficient: float
    target: StateSpec | None
    orthogonal_residual: float


def _ladder_field(field, L, Lm, axis, direction, order, params: SystemParams, e_state, hbar):
    scale = math.sqrt(params.hbar / (2 * params.m_r * params.omega))
    e_state, e_map = _map_energies(e_state, None)
    if direction == "lower":
        return scale * _entangled_derivative(field, L, Lm, axis, order, False, e_state, e_map, hbar)
    if direction == "raise":
        return -scale * _entangled_derivative(field, L, Lm, axis, order, True, e_state, e_map, hbar)
    raise DomainError(f"direction must be 'lower' or 'raise', got {direction!r}")


def ladder_apply(state: StateSpec, reference: ReferenceState, axis: int, direction: str,
                 params: SystemParams, grid: Grid, order: int = 4,
                 log_derivative: str = "sampled") -> LadderResult:
    """Apply a lowering or raising operator and project onto the expected neighbour state.

    Lowering a state with ``l_axis = 0`` has no target: the coefficient is 0
    and ``orthogonal_residual`` is the norm of the computed field relative to
    the state, which is how annihilation is measured.
    """
    from .oscillator import eigenstate

    if state.quantum_numbers is None:
        raise DomainError("ladder operators need an oscillator state with quantum numbers")
    field, L, Lm = _setup(state, reference, grid, order, log_derivative)
    out = _ladder_field(field, L, Lm, axis, direction, order, params, state.energy, reference.hbar)
    mask = reference.node_mask(grid)
    target_l = state.quantum_numbers.shifted(axis, -1 if direction == "lower" else 1)
    if target_l is None:
        rel = math.sqrt(norm2(out, mask) / norm2(_with_margin(field, out.margin), mask))
        return LadderResult(out, 0.0, None, rel)
    target = eigenstate(target_l, params, dim=grid.dim)
    t_field = _with_margin(target.sample(grid), out.margin)
    tt = norm2(t_field, mask)
    coefficient = inner(t_field, out, mask) / tt
    rest = out - coefficient * t_field
    return LadderResult(out, float(coefficient.real), target, math.sqrt(norm2(rest, mask) / tt))


@dataclass(frozen=True)
class NumberCheck:
    lhs_energy: float
    residual: float


def number_operator_check(state: StateSpec, reference: ReferenceState, params: SystemParams, grid: Grid,
                          order: int = 4, log_derivative: str = "sampled") -> NumberCheck:
    """Evaluate (sum_i a_i^dag a_i + dim/2) hbar omega Psi and fit it as a multiple of Psi."""
    field, L, Lm = _setup(state, reference, grid, order, log_derivative)
    hw = params.hbar * params.omega
    total = SeparableField(grid, (), 0)
    for axis in range(1, grid.dim + 1):
        lowered = _ladder_field(field, L, Lm, axis, "lower", order, params, state.energy, reference.hbar)
        total = total + _ladder_field(lowered, L, Lm, axis, "raise", order, params, state.energy,
                                      reference.hbar)
    lhs = hw * (total + (grid.dim / 2) * field)
    mask = reference.node_mask(grid)
    psi = _with_margin(field, lhs.margin)
    pp = norm2(psi, mask)
    energy = float((inner(psi, lhs, mask) / pp).real)
    rest = lhs - energy * psi
    scale = max(abs(energy), hw)
    return NumberCheck(energy, math.sqrt(norm2(rest, mask) / pp) / scale)


def commutator_residual(state: StateSpec, reference: ReferenceState, i: int, j: int, params: SystemParams,
                        grid: Grid, order: int = 4, log_derivative: str = "sampled") -> float:
    """Normalized RMS of [a_i, a_j^dag] Psi - delta_ij Psi."""
    field, L, Lm = _setup(state, reference, grid, order, log_derivative)
    e, hb = state.energy, reference.hbar

    def op(f, axis, direction):
        return _ladder_field(f, L, Lm, axis, direction, order, params, e, hb)

    comm = op(op(field, j, "raise"), i, "lower") - op(op(field, i, "lower"), j, "raise")
    if i == j:
        comm = comm - field
    mask = reference.node_mask(grid)
    return math.sqrt(norm2(comm, mask) / norm2(_with_margin(field, comm.margin), mask))


# ---------------------------------------------------------------------------
# holomorphy


@dataclass(frozen=True)
class HolomorphyProbe:
    """A function of complex s sampled on the rectangle t_grid x tau_grid (uniform spacing)."""

    f: Callable[[np.ndarray], np.ndarray]
    t_grid: np.ndarray
    tau_grid: np.ndarray

    def __post_init__(self):
        for name in ("t_grid", "tau_grid"):
            g = np.asarray(getattr(self, name), dtype=float)
            if g.ndim != 1 or g.size < 5:
                raise DomainError(f"{name} must be a 1D array of at least 5 nodes")
            steps = np.diff(g)
            if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps.mean():
                raise DomainError(f"{name} must be uniformly increasing")
            object.__setattr__(self, name, g)

    @property
    def dt(self) -> float:
        return float(self.t_grid[1] - self.t_grid[0])

    @property
    def dtau(self) -> float:
        return float(self.tau_grid[1] - self.tau_grid[0])

    def values(self) -> np.ndarray:
        s = self.t_grid[:, None] + 1j * self.tau_grid[None, :]
        return np.asarray(self.f(s), dtype=complex) * np.ones_like(s)


def probe_rectangle(f, t_range=(-1.0, 1.0), tau_range=(-2.0, 0.0), step=0.01) -> HolomorphyProbe:
    def axis(lo, hi):
        n = int(round((hi - lo) / step))
        return lo + step * np.arange(n + 1)

    return HolomorphyProbe(f, axis(*t_range), axis(*tau_range))


def _rms(a):
    return float(np.sqrt(np.mean(np.abs(a) ** 2))) if a.size else 0.0


def _value_floor(probe, f, inside, power):
    # |f| / span^power keeps the scale meaningful when both derivative terms vanish (conj(s)).
    span = max(np.ptp(probe.t_grid), np.ptp(probe.tau_grid))
    return f[inside] / span ** power


def _probe_report(name, probe, residual, scale_terms, tolerance, notes):
    scale_rms = max(_rms(t) for t in scale_terms)
    scale_max = max(float(np.abs(t).max()) for t in scale_terms)
    rms = _rms(residual) / scale_rms if scale_rms > 0 else _rms(residual)
    mx = float(np.abs(residual).max()) / scale_max if scale_max > 0 else float(np.abs(residual).max())
    return ResidualReport(
        check_name=name,
        h=float(f"{probe.dt:.12g}"),
        extent=float(max(np.abs(probe.t_grid).max(), np.abs(probe.tau_grid).max())),
        n="-",
        m="-",
        residual_rms=rms,
        residual_max=mx,
        tolerance=tolerance,
        grid={"t": [float(probe.t_grid[0]), float(probe.t_grid[-1]), probe.t_grid.size],
              "tau": [float(probe.tau_grid[0]), float(probe.tau_grid[-1]), probe.tau_grid.size]},
        notes=notes,
    )


def cr_residual(probe: HolomorphyProbe, order: int = 4, tolerance: float = 1e-8,
                name: str = "cr_laplace") -> ResidualReport:
    """Laplace form f_tt + f_tau,tau, normalized by the larger of the two terms (or |f|/span^2)."""
    f = probe.values()
    m = order // 2
    inside = (slice(m, -m), slice(m, -m))
    ftt = stencil_1d(f, probe.dt, order, 2, axis=0)[inside]
    fuu = stencil_1d(f, probe.dtau, order, 2, axis=1)[inside]
    floor = _value_floor(probe, f, inside, 2)
    return _probe_report(name, probe, ftt + fuu, (ftt, fuu, floor), tolerance, {"form": "laplace"})


def cr_pair_residual(probe: HolomorphyProbe, order: int = 4, tolerance: float = 1e-8,
                     name: str = "cr_pair") -> ResidualReport:
    """First-order Cauchy-Riemann pair for f(t + i tau) = g + i h.

    Holomorphy in s requires g_t = h_tau and g_tau = -h_t, i.e.
    f_tau - i f_t = 0.  The report normalizes by the larger of |f_t|, |f_tau|
    and records the largest violation of each real equation.
    """
    f = probe.values()
    m = order // 2
    inside = (slice(m, -m), slice(m, -m))
    ft = stencil_1d(f, probe.dt, order, 1, axis=0)[inside]
    fu = stencil_1d(f, probe.dtau, order, 1, axis=1)[inside]
    residual = fu - 1j * ft
    notes = {
        "form": "first-order pair",
        "max|g_tau + h_t|": float(np.abs(residual.real).max()),
        "max|h_tau - g_t|": float(np.abs(residual.imag).max()),
    }
    return _probe_report(name, probe, residual, (ft, fu, _value_floor(probe, f, inside, 1)), tolerance, notes)


# ---------------------------------------------------------------------------
# convergence


def observed_order(spacings, errors) -> list[float]:
    """Observed convergence orders between successive (spacing, error) pairs."""
    out = []
    for (h0, e0), (h1, e1) in zip(zip(spacings, errors), zip(spacings[1:], errors[1:])):
        out.append(math.log(e0 / e1) / math.log(h0 / h1))
    return out
