"""Residuals of the separated Schrodinger equations and of their entangled form.

Every check returns a :class:`ResidualReport` whose ``residual_rms`` is
RMS(LHS) / (E_scale * RMS(Psi)) over the admitted nodes, with
E_scale = max(|E_n|, hbar*omega).
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core_model import (
    EPS_NODE,
    LOG_EPS_NODE,
    REPORT_COLUMNS,
    DomainError,
    Grid,
    NodeMask,
    ReferenceState,
    ResidualReport,
    SeparableField,
    StateSpec,
    SystemParams,
    count,
    make_grid,
    make_system,
    max_abs,
    norm2,
)
from .diffcalc import (
    cr_pair_residual,
    cr_residual,
    ladder_apply,
    mixed_second,
    number_operator_check,
    probe_rectangle,
    stencil_1d,
)
from .entangle_map import (
    consistency_ratio,
    entangled_amplitude,
    expected_ratio_constant,
    tau,
    to_entangled,
)
from .oscillator import eigenstate, ground_state

__all__ = [
    "PotentialSpec",
    "ResidualReport",
    "SuiteConfig",
    "SUITES",
    "oscillator_potential",
    "quartic_potential",
    "tabulated_potential",
    "residual_relative",
    "residual_reference",
    "residual_entangled",
    "residual_com",
    "residual_time",
    "coordinate_independence_check",
    "run_suite",
    "aggregate_pass",
    "write_reports_csv",
    "write_reports_json",
]

TOL_CLOSED = 1e-6
TOL_ORACLE = 1e-4
TOL_EXACT = 1e-8


# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class PotentialSpec:
    """Separable potential v(x) = sum_j axes[j](x_j)."""

    kind: str
    axes: tuple[Callable[[np.ndarray], np.ndarray], ...]
    description: str = ""

    def __post_init__(self):
        if self.kind not in ("oscillator", "custom-separable"):
            raise DomainError(f"potential kind must be oscillator or custom-separable, got {self.kind!r}")

    @property
    def dim(self) -> int:
        return len(self.axes)

    def v(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return sum(np.asarray(fn(x[..., j]), dtype=float) for j, fn in enumerate(self.axes))

    __call__ = v

    def axis_samples(self, grid: Grid) -> list[np.ndarray]:
        if grid.dim != self.dim:
            raise DomainError(f"potential is {self.dim}D, grid is {grid.dim}D")
        out = []
        for j, fn in enumerate(self.axes):
            with np.errstate(all="ignore"):
                v = np.asarray(fn(grid.axis(j)))
            if np.iscomplexobj(v) or not np.all(np.isfinite(v)):
                raise DomainError(f"potential along axis {j + 1} must be finite and real")
            out.append(np.broadcast_to(v.astype(float), (grid.points[j],)))
        return out


def oscillator_potential(params: SystemParams, dim: int = 3) -> PotentialSpec:
    k = params.m_r * params.omega ** 2

    def v(x):
        return 0.5 * k * np.asarray(x, dtype=float) ** 2

    return PotentialSpec("oscillator", (v,) * dim, f"harmonic, m_r omega^2 = {k!r}")


def quartic_potential(strength: float = 1.0, dim: int = 1) -> PotentialSpec:
    def v(x):
        return strength * np.asarray(x, dtype=float) ** 4

    return PotentialSpec("custom-separable", (v,) * dim, f"quartic {strength!r} x^4")


def tabulated_potential(x_nodes, v_nodes, dim: int = 1, description: str = "tabulated") -> PotentialSpec:
    """Linear interpolation of (x, v) samples; constant beyond the table."""
    if np.iscomplexobj(x_nodes) or np.iscomplexobj(v_nodes):
        raise DomainError("tabulated potential must be real")
    x_nodes = np.asarray(x_nodes, dtype=float)
    v_nodes = np.asarray(v_nodes, dtype=float)
    if x_nodes.ndim != 1 or x_nodes.shape != v_nodes.shape or x_nodes.size < 2:
        raise DomainError("a tabulated potential needs two equal-length columns with at least two rows")
    if np.any(np.diff(x_nodes) <= 0):
        raise DomainError("tabulated potential x column must be strictly increasing")
    if not np.all(np.isfinite(v_nodes)):
        raise DomainError("tabulated potential has non-finite values")

    def v(x):
        return np.interp(np.asarray(x, dtype=float), x_nodes, v_nodes)

    return PotentialSpec("custom-separable", (v,) * dim, description)


# ---------------------------------------------------------------------------
# shared plumbing


def energy_scale(energy: float, params: SystemParams) -> float:
    return max(abs(energy), params.hbar * params.omega)


def _laplacian(field: SeparableField, order: int) -> SeparableField:
    total = SeparableField(field.grid, (), 0)
    for i in range(field.grid.dim):
        h = field.grid.spacing[i]
        total = total + field.map_axis(i, lambda f: stencil_1d(f, h, order, 2), margin=order // 2)
    return total.with_margin(field.margin + order // 2)


def _normalized(lhs, psi, mask: NodeMask, scale: float) -> tuple[float, float]:
    psi = psi.with_margin(lhs.margin)
    mask = mask.with_margin(lhs.margin)
    pp = norm2(psi, mask)
    if pp == 0.0:
        raise DomainError("no admitted node carries amplitude")
    rms = math.sqrt(norm2(lhs, mask) / pp) / scale
    rms_psi = math.sqrt(pp / count(psi.grid, mask))
    return rms, max_abs(lhs, mask) / (scale * rms_psi)


def _report(name, grid: Grid, params: SystemParams, n, m, rms, mx, tolerance, **notes) -> ResidualReport:
    return ResidualReport(
        check_name=name,
        h=grid.h,
        extent=grid.extent[0],
        n=n,
        m=m,
        residual_rms=rms,
        residual_max=mx,
        tolerance=tolerance,
        grid=grid.summary(),
        params=params.summary(),
        notes=notes,
    )


def _schrodinger(state: StateSpec, potential: PotentialSpec, params: SystemParams, grid: Grid,
                 order: int, mask: NodeMask):
    psi = state.sample(grid)
    kinetic = params.hbar ** 2 / (2 * params.m_r)
    lhs = kinetic * _laplacian(psi, order) + state.energy * psi - psi.multiply_sum(potential.axis_samples(grid))
    return _normalized(lhs, psi, mask, energy_scale(state.energy, params))


def residual_relative(state: StateSpec, potential: PotentialSpec, params: SystemParams, grid: Grid,
                      order: int = 4, tolerance: float = TOL_CLOSED, mask: NodeMask | None = None,
                      name: str = "relative") -> ResidualReport:
    """(hbar^2/2m_r) lap Psi_I + (E_n - V) Psi_I over the interior."""
    rms, mx = _schrodinger(state, potential, params, grid, order, mask or NodeMask())
    return _report(name, grid, params, state.label, "-", rms, mx, tolerance,
                   energy=state.energy, potential=potential.description)


def residual_reference(reference: ReferenceState, potential: PotentialSpec, params: SystemParams, grid: Grid,
                       order: int = 4, tolerance: float = TOL_CLOSED, name: str = "reference") -> ResidualReport:
    """Same as :func:`residual_relative` for the reference state at E_m."""
    rms, mx = _schrodinger(reference.as_state(), potential, params, grid, order, reference.node_mask(grid))
    return _report(name, grid, params, "-", reference.label, rms, mx, tolerance,
                   energy=reference.energy_m, potential=potential.description, source=reference.source)


def residual_entangled(state: StateSpec, reference: ReferenceState, params: SystemParams, grid: Grid,
                       order: int = 4, tolerance: float = TOL_CLOSED, log_derivative: str = "sampled",
                       name: str = "entangled") -> ResidualReport:
    """(hbar^2/2m_r) sum_i d^2 Psi/dz_i* dz_i + (E_n - E_m) Psi.

    No potential enters: the only inputs are the state, the reference and the
    masses.
    """
    ms = mixed_second(state, reference, grid, order, log_derivative)
    psi = state.sample(grid)
    kinetic = params.hbar ** 2 / (2 * params.m_r)
    lhs = kinetic * ms.field + (state.energy - reference.energy_m) * psi.with_margin(ms.field.margin)
    rms, mx = _normalized(lhs, psi, reference.node_mask(grid), energy_scale(state.energy, params))
    return _report(name, grid, params, state.label, reference.label, rms, mx, tolerance,
                   energy_gap=state.energy - reference.energy_m, route_discrepancy=ms.max_discrepancy,
                   log_derivative=log_derivative)


def residual_com(P, E_total: float, E_n: float, params: SystemParams, grid: Grid, order: int = 4,
                 tolerance: float = TOL_CLOSED, name: str = "com") -> ResidualReport:
    """(hbar^2/2m_c) lap_X Psi_E + (E - E_n) Psi_E for the plane wave exp(i P.X/hbar).

    d/dZ = d/dX, so the same evaluation is the entangled center-of-mass
    equation; the report carries both coordinate labels.
    """
    P = np.broadcast_to(np.asarray(P, dtype=float), (grid.dim,))
    factors = [np.exp(1j * P[j] * grid.axis(j) / params.hbar) for j in range(grid.dim)]
    psi = SeparableField.product(grid, factors)
    kinetic = params.hbar ** 2 / (2 * params.m_c)
    lhs = kinetic * _laplacian(psi, order) + (E_total - E_n) * psi
    rms, mx = _normalized(lhs, psi, NodeMask(), energy_scale(E_n, params))
    return _report(name, grid, params, "-", "-", rms, mx, tolerance,
                   coordinates="X|Z", momentum=[float(p) for p in P], E_total=E_total, E_n=E_n)


def _time_stencil(values: np.ndarray, dt: float, order: int) -> np.ndarray:
    m = order // 2
    return stencil_1d(values, dt, order, 1, axis=-1)[..., m:-m]


def residual_time(state: StateSpec, E: float, reference: ReferenceState, params: SystemParams,
                  grid: Grid | None = None, t_range=(-1.0, 1.0), dt: float = 0.01, order: int = 4,
                  phase_sign: int = 1, tolerance: float = TOL_EXACT, points: int = 41,
                  name: str = "time") -> ResidualReport:
    """i hbar dPsi/dt = E Psi for Psi = Psi_I(x) exp(-i phase_sign E_state t/hbar), and its twin in s.

    The twin writes the state as theta(z) exp(-i E s/hbar) with s = t + i tau(z)
    and differentiates along lines of constant tau, where d/ds = d/dt.  The
    spatial points are up to ``points`` admitted nodes along the first axis.
    A zero-energy state uses tau = 0 for the twin, where the map is undefined.
    """
    hb = params.hbar
    e_state = state.energy
    t = np.arange(round((t_range[1] - t_range[0]) / dt) + 1) * dt + t_range[0]
    dim = state.dim
    if grid is None:
        grid = make_grid(4.0, 0.1, dim)
    axis = grid.axis(0)
    xs = np.zeros((axis.size, dim))
    xs[:, 0] = axis
    logs = reference.log_abs(xs)
    xs = xs[logs >= LOG_EPS_NODE]
    if reference.domain is not None:
        xs = xs[np.all(np.abs(xs) <= np.asarray(reference.domain) + 1e-12, axis=-1)]
    stride = max(1, math.ceil(xs.shape[0] / points))
    xs = xs[::stride]
    m = order // 2
    scale = energy_scale(E, params)

    def measure(psi):
        lhs = 1j * hb * _time_stencil(psi, dt, order) - E * psi[..., m:-m]
        ref_rms = np.sqrt(np.mean(np.abs(psi[..., m:-m]) ** 2))
        return (float(np.sqrt(np.mean(np.abs(lhs) ** 2)) / (scale * ref_rms)),
                float(np.abs(lhs).max() / (scale * ref_rms)))

    amplitude = state.psi_I(xs)
    real_rms, real_max = measure(amplitude[:, None] * np.exp(-1j * phase_sign * e_state * t[None, :] / hb))
    if e_state == 0:
        theta, tau0 = amplitude, np.zeros(xs.shape[0])
    else:
        theta = entangled_amplitude(state, reference)(xs)
        tau0 = tau(reference, e_state, xs) * np.ones(xs.shape[0])
    s = t[None, :] + 1j * tau0[:, None]
    twin_rms, twin_max = measure(theta[:, None] * np.exp(-1j * phase_sign * e_state * s / hb))
    return ResidualReport(
        check_name=name,
        h=dt,
        extent=float(max(abs(t_range[0]), abs(t_range[1]))),
        n=state.label,
        m=reference.label,
        residual_rms=max(real_rms, twin_rms),
        residual_max=max(real_max, twin_max),
        tolerance=tolerance,
        grid={"t": [float(t[0]), float(t[-1]), int(t.size)], "points": int(xs.shape[0])},
        params=params.summary(),
        notes={"real_time_rms": real_rms, "entangled_time_rms": twin_rms, "E": E},
    )


def _map_fields(X, x, t, reference, E, normalization):
    p = to_entangled(X, x, t, reference, E, normalization)
    return {"Z": p.Z, "z": p.z, "s": p.s}


def coordinate_independence_check(reference: ReferenceState, params: SystemParams, grid: Grid,
                                  E: float | None = None, normalization: str = "keep",
                                  delta: float = 0.01, shift: float = 0.37, points: int = 41,
                                  tolerance: float = TOL_EXACT,
                                  name: str = "coord_independence") -> ResidualReport:
    """Finite-difference cross-derivatives of the map fields, all of which must vanish.

    Checked: dZ/dx_j, dZ/dt, dz/dX_i, dz/dt, ds/dX_i, dz_i/dx_j - delta_ij,
    ds/dt - 1, and the change of every field when X is translated by
    ``shift`` along each axis.  Nodes are subsampled to at most ``points`` per
    axis and restricted to the reference's admitted set.
    """
    E = reference.energy_m if E is None else E
    dim = grid.dim
    stride = [max(1, math.ceil(n / points)) for n in grid.points]
    mesh = np.meshgrid(*[grid.axis(i)[::stride[i]] for i in range(dim)], indexing="ij")
    x = np.stack([m.ravel() for m in mesh], axis=-1)
    keep = reference.log_abs(x) >= LOG_EPS_NODE
    if reference.domain is not None:
        keep &= np.all(np.abs(x) <= np.asarray(reference.domain) + 1e-12, axis=-1)
    x = x[keep]
    X0 = np.full_like(x, 0.25)
    t0 = np.full(x.shape[0], 0.5)
    offsets = np.array([-2.0, -1.0, 1.0, 2.0])
    weights = np.array([1.0, -8.0, 8.0, -1.0]) / (12.0 * delta)

    terms = {}
    for i in range(dim):
        dX = _sum_fields([_weighted(_map_fields(_moved(X0, i, o * delta), x, t0, reference, E, normalization), w)
                          for o, w in zip(offsets, weights)])
        terms[f"dz/dX{i + 1}"] = dX["z"]
        terms[f"ds/dX{i + 1}"] = dX["s"]
        terms[f"dZ{i + 1}/dX{i + 1}-1"] = dX["Z"][:, i] - 1.0
        dx = _sum_fields([_weighted(_map_fields(X0, _moved(x, i, o * delta), t0, reference, E, normalization), w)
                          for o, w in zip(offsets, weights)])
        terms[f"dZ/dx{i + 1}"] = dx["Z"]
        eye = np.zeros(dim)
        eye[i] = 1.0
        terms[f"dz/dx{i + 1}-e{i + 1}"] = dx["z"] - eye
    dt = _sum_fields([_weighted(_map_fields(X0, x, t0 + o * delta, reference, E, normalization), w)
                      for o, w in zip(offsets, weights)])
    terms["dZ/dt"] = dt["Z"]
    terms["dz/dt"] = dt["z"]
    terms["ds/dt-1"] = dt["s"] - 1.0
    base = _map_fields(X0, x, t0, reference, E, normalization)
    for i in range(dim):
        moved = _map_fields(_moved(X0, i, shift), x, t0, reference, E, normalization)
        terms[f"translate X{i + 1}: z"] = moved["z"] - base["z"]
        terms[f"translate X{i + 1}: s"] = moved["s"] - base["s"]
        terms[f"translate X{i + 1}: Z-shift"] = moved["Z"] - base["Z"] - shift * np.eye(dim)[i]
    worst = {k: float(np.max(np.abs(v))) if np.size(v) else 0.0 for k, v in terms.items()}
    flat = np.concatenate([np.abs(np.ravel(v)) for v in terms.values()])
    rms = float(np.sqrt(np.mean(flat ** 2))) if flat.size else 0.0
    return _report(name, grid, params, "-", reference.label, rms, max(worst.values()), tolerance,
                   nodes=int(x.shape[0]), worst_term=max(worst, key=worst.get))


def _moved(a, i, step):
    a = np.array(a, dtype=float)
    a[:, i] += step
    return a


def _weighted(fields, w):
    return {k: w * v for k, v in fields.items()}


def _sum_fields(items):
    out = dict(items[0])
    for f in items[1:]:
        for k in out:
            out[k] = out[k] + f[k]
    return out


# ---------------------------------------------------------------------------
# suites


@dataclass(frozen=True)
class SuiteConfig:
    """Everything a suite run depends on; identical configs give identical reports."""

    suite: str = "oscillator-core"
    params: SystemParams = field(default_factory=make_system)
    l: tuple[int, int, int] = (0, 0, 0)
    ref: str = "ground"
    potential: str = "oscillator"
    potential_table: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    quartic_strength: float = 1.0
    h: float = 0.05
    extent: float = 8.0
    order: int = 4
    tau_normalization: str = "keep"
    log_derivative: str = "sampled"
    inject_energy_error: float = 0.0
    tol_closed: float = TOL_CLOSED
    tol_oracle: float = TOL_ORACLE
    tol_exact: float = TOL_EXACT
    com_momentum: tuple[float, float, float] = (0.0, 0.0, 0.0)
    oracle_h: float = 0.01
    oracle_states: int = 3


def _probe_grid(config: SuiteConfig, dim: int = 3) -> Grid:
    # dense checks (map fields, ratio) run on a coarser box than the
    # separable residuals
    extent = min(config.extent, 4.0)
    for h in (0.1, config.h):
        try:
            return make_grid(extent, max(h, config.h), dim)
        except DomainError:
            continue
    return make_grid(config.extent, config.h, dim)


def _suite_potential(config: SuiteConfig, dim: int) -> PotentialSpec:
    if config.potential == "oscillator":
        return oscillator_potential(config.params, dim)
    if config.potential == "quartic":
        return quartic_potential(config.quartic_strength, dim)
    if config.potential == "file":
        if config.potential_table is None:
            raise DomainError("potential=file needs a potential table")
        return tabulated_potential(*config.potential_table, dim=dim, description="file")
    raise DomainError(f"unknown potential {config.potential!r}")


def _oracle_states(config: SuiteConfig, potential: PotentialSpec):
    from .spectral_oracle import auto_extent, make_reference_from_numeric, solve_1d

    v = potential.axes[0]
    params = config.params
    # energy estimate from a coarse solve sizes the box
    rough = solve_1d(v(make_grid(10.0, 0.05).axis(0)), make_grid(10.0, 0.05), params, config.oracle_states,
                     refine=False)
    extent = auto_extent(v, params, rough[-1].energy)
    extent = math.ceil(extent / (4 * config.oracle_h)) * 4 * config.oracle_h
    grid = make_grid(round(extent, 10), config.oracle_h)
    pairs = solve_1d(v(grid.axis(0)), grid, params, config.oracle_states)
    return pairs, make_reference_from_numeric(pairs[0], params=params)


def _with_injection(state: StateSpec, config: SuiteConfig) -> StateSpec:
    if config.inject_energy_error:
        return state.with_energy(state.energy + config.inject_energy_error * config.params.hbar * config.params.omega)
    return state


def _core_reference(config: SuiteConfig, dim: int):
    if config.ref == "ground":
        return ground_state(config.params, dim), config.tol_closed
    if config.ref == "numeric":
        from .spectral_oracle import separable_reference

        _, ref1 = _oracle_states(config, oscillator_potential(config.params, 1))
        return separable_reference([ref1] * dim, config.params), config.tol_oracle
    raise DomainError(f"ref must be ground or numeric, got {config.ref!r}")


def _ladder_report(state, ref, config, grid):
    params = config.params
    ls = state.quantum_numbers.as_tuple()
    axis = next((i + 1 for i, v in enumerate(ls) if v > 0), 1)
    res = ladder_apply(state, ref, axis, "lower", params, grid, config.order, config.log_derivative)
    if res.target is None:
        tol = config.tol_exact if ref.source == "closed-form" else config.tol_oracle
        return _report("ladder", grid, params, state.label, ref.label, res.orthogonal_residual,
                       res.orthogonal_residual, tol, axis=axis, direction="lower",
                       coefficient=0.0, expected=0.0)
    expected = math.sqrt(ls[axis - 1])
    err = abs(res.coefficient - expected)
    return _report("ladder", grid, params, state.label, ref.label, err, res.orthogonal_residual,
                   config.tol_closed, axis=axis, direction="lower", coefficient=res.coefficient,
                   expected=expected)


def _number_report(state, ref, config, grid):
    params = config.params
    check = number_operator_check(state, ref, params, grid, config.order, config.log_derivative)
    err = abs(check.lhs_energy - state.energy) / energy_scale(state.energy, params)
    return _report("number_operator", grid, params, state.label, ref.label, err, check.residual,
                   config.tol_closed, lhs_energy=check.lhs_energy, expected=state.energy)


def _cr_reports(energy, config):
    probe = probe_rectangle(lambda s: np.exp(-1j * energy * s / config.params.hbar))
    return [cr_residual(probe, config.order, config.tol_exact, name="cr_laplace"),
            cr_pair_residual(probe, config.order, config.tol_exact, name="cr_pair")]


def _consistency_report(config, l):
    params = config.params
    grid = _probe_grid(config)
    stats = consistency_ratio(l, grid, 0.5, params, config.tau_normalization)
    expected = expected_ratio_constant(params, config.tau_normalization)
    offset = abs(stats.mean - expected) / expected
    return _report("consistency", grid, params, ",".join(map(str, l)), "0,0,0",
                   max(stats.relative_spread, offset), max(stats.relative_spread, offset), config.tol_exact,
                   mean_real=stats.mean.real, mean_imag=stats.mean.imag, expected=expected,
                   relative_spread=stats.relative_spread, nodes=stats.count,
                   tau_normalization=config.tau_normalization)


def _oscillator_core(config: SuiteConfig):
    params = config.params
    grid = make_grid(config.extent, config.h, 3)
    ref, tol = _core_reference(config, 3)
    exact = eigenstate(config.l, params)
    state = _with_injection(exact, config)
    potential = oscillator_potential(params, 3)
    P = np.asarray(config.com_momentum, dtype=float)
    kinetic_com = float(P @ P) / (2 * params.m_c)
    jobs = [
        lambda: residual_relative(state, potential, params, grid, config.order, config.tol_closed,
                                  mask=ref.node_mask(grid)),
        lambda: residual_reference(ref, potential, params, grid, config.order, tol),
        lambda: residual_entangled(state, ref, params, grid, config.order, tol, config.log_derivative),
        lambda: _routes_report(exact, ref, config, grid, tol),
        lambda: residual_com(P, exact.energy + kinetic_com, exact.energy, params, grid, config.order,
                             config.tol_closed),
        lambda: residual_time(state, exact.energy, ref, params, _probe_grid(config), order=config.order,
                              tolerance=config.tol_exact),
        lambda: coordinate_independence_check(ref, params, _probe_grid(config),
                                              normalization=config.tau_normalization,
                                              tolerance=config.tol_exact),
        lambda: _ladder_report(exact, ref, config, grid),
        lambda: _number_report(exact, ref, config, grid),
        lambda: _cr_reports(exact.energy, config),
        lambda: _consistency_report(config, exact.quantum_numbers.as_tuple()),
    ]
    return jobs


def _routes_report(state, ref, config, grid, tol):
    ms = mixed_second(state, ref, grid, config.order, config.log_derivative)
    psi = state.sample(grid)
    diff = ms.field - ms.identity_field
    rms, mx = _normalized(diff.with_margin(max(ms.field.margin, ms.identity_field.margin)), psi,
                          ref.node_mask(grid), energy_scale(state.energy, config.params))
    return _report("mixed_routes", grid, config.params, state.label, ref.label, rms, mx, tol,
                   max_discrepancy=ms.max_discrepancy)


def _oscillator_spectrum(config: SuiteConfig):
    params = config.params
    grid = make_grid(config.extent, config.h, 3)
    ref = ground_state(params)
    potential = oscillator_potential(params, 3)
    jobs = []
    for n in range(7):
        for l in _triples(n):
            st = _with_injection(eigenstate(l, params), config)
            jobs.append(lambda st=st: residual_relative(st, potential, params, grid, config.order,
                                                        config.tol_closed, mask=ref.node_mask(grid),
                                                        name=f"relative[{st.label}]"))
            jobs.append(lambda st=st: residual_entangled(st, ref, params, grid, config.order, config.tol_closed,
                                                         config.log_derivative, name=f"entangled[{st.label}]"))
    return jobs


def _triples(n):
    return [(a, b, n - a - b) for a in range(n, -1, -1) for b in range(n - a, -1, -1)]


def _oracle(config: SuiteConfig):
    """1D checks against oracle eigenpairs for the configured potential."""
    from .spectral_oracle import separable_compose

    params = config.params
    potential = _suite_potential(config, 1)
    pairs, ref = _oracle_states(config, potential)
    half = math.floor(ref.domain[0] / config.oracle_h) * config.oracle_h
    grid = make_grid(round(half, 10), config.oracle_h)
    tol = config.tol_oracle
    jobs = [lambda: residual_reference(ref, potential, params, grid, config.order, tol, name="oracle_reference")]
    for pair in pairs[1:]:
        st = _with_injection(separable_compose([pair], params), config)
        jobs.append(lambda st=st: residual_entangled(st, ref, params, grid, config.order, tol,
                                                     config.log_derivative, name=f"oracle_entangled[{st.label}]"))
    # the entangled equation must also hold with an excited reference on a
    # node-free lobe, with E_m taken from that reference
    excited = next((p for p in pairs[1:] if p.node_count == 1), None)
    if excited is not None:
        jobs.append(lambda: _lobe_check(pairs[0], excited, ref.domain[0], config, tol))
    return jobs


def _lobe_check(target, excited, reach, config, tol):
    from .spectral_oracle import lobe_reference, separable_compose, shift_state

    params = config.params
    x = excited.grid.axis(0)
    peak = float(x[x > 0][np.argmax(np.abs(excited.wavefunction[x > 0]))])
    alive = x[(x > 0) & (np.abs(excited.wavefunction) >= 1e3 * EPS_NODE)]
    lobe_ref, center = lobe_reference(excited, 0.5 * peak, min(float(alive.max()), reach), params)
    state = shift_state(separable_compose([target], params), center)
    grid = make_grid(round(lobe_ref.domain[0], 10), excited.grid.h)
    report = residual_entangled(state, lobe_ref, params, grid, config.order, tol, config.log_derivative,
                                name="reference_independence")
    report.notes["center"] = center
    return report


SUITES = {
    "oscillator-core": _oscillator_core,
    "oscillator-spectrum": _oscillator_spectrum,
    "oracle": _oracle,
    "empty": lambda config: [],
}


def _threads() -> int:
    raw = os.environ.get("ENTANGLE_VERIFY_THREADS", "0")
    try:
        return max(0, int(raw))
    except ValueError:
        raise DomainError(f"ENTANGLE_VERIFY_THREADS must be an integer, got {raw!r}") from None


def run_suite(config: SuiteConfig) -> list[ResidualReport]:
    """Run every check of ``config.suite``; reports are sorted by check name."""
    if config.suite not in SUITES:
        raise DomainError(f"unknown suite {config.suite!r}; known: {', '.join(sorted(SUITES))}")
    jobs = SUITES[config.suite](config)
    workers = _threads()
    if workers and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: job(), jobs))
    else:
        results = [job() for job in jobs]
    reports = []
    for r in results:
        reports.extend(r if isinstance(r, list) else [r])
    return sorted(reports, key=lambda r: r.check_name)


def aggregate_pass(reports: Sequence[ResidualReport]) -> bool:
    return all(r.passed for r in reports)


def write_reports_csv(stream, reports: Sequence[ResidualReport]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        writer.writerow(r.row())


def write_reports_json(stream, reports: Sequence[ResidualReport], params: SystemParams | None = None) -> None:
    doc = {
        "aggregate_pass": aggregate_pass(reports),
        "params": params.summary() if params is not None else {},
        "checks": [r.as_dict() for r in reports],
    }
    json.dump(doc, stream, indent=2, sort_keys=True, allow_nan=True)
    stream.write("\n")
