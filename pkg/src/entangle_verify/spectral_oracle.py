"""Brute-force 1D eigensolver used as an independent oracle.

The Hamiltonian -(hbar^2/2 m_r) D2 + diag(v) is discretized with the
three-point second difference and Dirichlet ends.  Eigenvalues come from
bisection on the Sturm count of the symmetric tridiagonal matrix, vectors from
inverse iteration.  Energies are reported Richardson-refined from a second
solve at twice the spacing.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from .core_model import (
    EPS_NODE,
    ConvergenceError,
    DomainError,
    Grid,
    QuantumNumbers,
    ReferenceState,
    StateSpec,
    SystemParams,
    make_grid,
)

MAX_STATES = 12
BISECTION_CAP = 200
INVERSE_CAP = 50


@dataclass(frozen=True, eq=False)
class EigenPair:
    """One eigenpair on a 1D grid.  ``wavefunction`` includes the zero end nodes."""

    energy: float
    wavefunction: np.ndarray
    node_count: int
    grid: Grid
    raw_energy: float
    index: int = 0

    def norm(self) -> float:
        return float(np.sum(self.wavefunction ** 2) * self.grid.h)


def tridiagonal(v_values: np.ndarray, h: float, params: SystemParams):
    """Diagonal and off-diagonal of the interior operator (end nodes removed)."""
    kinetic = params.hbar ** 2 / (2.0 * params.m_r * h * h)
    diag = 2.0 * kinetic + np.asarray(v_values, dtype=float)[1:-1]
    off = np.full(diag.size - 1, -kinetic)
    return diag, off


def sturm_count(diag: np.ndarray, off: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Number of eigenvalues below each entry of ``lam``."""
    lam = np.asarray(lam, dtype=float)
    off2 = np.concatenate(([0.0], off * off))
    tiny = np.finfo(float).tiny ** 0.5
    q = np.ones_like(lam)
    negatives = np.zeros(lam.shape, dtype=int)
    for a, b2 in zip(diag, off2):
        q = a - lam - b2 / q
        # a zero pivot is nudged off zero; the count is unaffected
        q = np.where(q == 0.0, -tiny, q)
        negatives += q < 0
    return negatives


def _bisect(diag, off, k):
    radius = np.concatenate(([0.0], np.abs(off))) + np.concatenate((np.abs(off), [0.0]))
    lo = np.full(k, float(np.min(diag - radius)))
    hi = np.full(k, float(np.max(diag + radius)))
    target = np.arange(k)
    scale = max(abs(lo[0]), abs(hi[0]), 1.0)
    for _ in range(BISECTION_CAP):
        mid = 0.5 * (lo + hi)
        below = sturm_count(diag, off, mid) > target
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * scale):
            return 0.5 * (lo + hi)
    raise ConvergenceError(
        f"Sturm bisection did not converge in {BISECTION_CAP} steps; widest bracket {np.max(hi - lo):.3e}")


def _inverse_iteration(diag, off, lam, previous):
    n = diag.size
    scale = max(float(np.max(np.abs(diag))), 1.0)
    shift = lam + 1e3 * np.finfo(float).eps * scale
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag - shift
    ab[2, :-1] = off
    x = np.random.default_rng(n).standard_normal(n)
    resid = math.inf
    for _ in range(INVERSE_CAP):
        for p in previous:
            x = x - (p @ x) * p
        y = solve_banded((1, 1), ab, x)
        y /= np.linalg.norm(y)
        ay = diag * y
        ay[1:] += off * y[:-1]
        ay[:-1] += off * y[1:]
        resid = float(np.linalg.norm(ay - lam * y))
        x = y
        # one extra sweep after convergence cleans the far tails
        if resid <= 1e-11 * scale:
            y = solve_banded((1, 1), ab, x)
            return y / np.linalg.norm(y)
    raise ConvergenceError(f"inverse iteration stalled at eigenvalue {lam!r}, residual {resid:.3e}")


def _node_count(psi: np.ndarray) -> int:
    significant = psi[np.abs(psi) > 1e-8 * np.max(np.abs(psi))]
    return int(np.sum(np.signbit(significant[1:]) != np.signbit(significant[:-1])))


def _raw_solve(v_values, grid: Grid, params: SystemParams, k: int):
    diag, off = tridiagonal(v_values, grid.h, params)
    if diag.size < k:
        raise DomainError(f"grid has {diag.size} interior nodes, fewer than the {k} states requested")
    energies = _bisect(diag, off, k)
    vectors = []
    for lam in energies:
        vectors.append(_inverse_iteration(diag, off, lam, vectors))
    return energies, vectors


def solve_1d(v_values, grid: Grid, params: SystemParams, k: int = 1, refine: bool = True) -> list[EigenPair]:
    """Lowest ``k`` eigenpairs of the discretized 1D relative Hamiltonian.

    ``v_values`` are the potential samples on every node of ``grid``.  With
    ``refine`` and an even interval count the energies are extrapolated as
    (4 E_h - E_2h)/3; ``raw_energy`` keeps the unrefined eigenvalue.
    """
    if grid.dim != 1:
        raise DomainError("solve_1d needs a 1D grid")
    if int(k) != k or not 1 <= k <= MAX_STATES:
        raise DomainError(f"k must be an integer in [1, {MAX_STATES}], got {k!r}")
    v_values = np.asarray(v_values, dtype=float)
    if v_values.shape != grid.shape or not np.all(np.isfinite(v_values)):
        raise DomainError("potential samples must be finite and match the grid")
    energies, vectors = _raw_solve(v_values, grid, params, k)
    refined = energies
    intervals = grid.points[0] - 1
    if refine and intervals % 4 == 0:
        coarse = make_grid(grid.extent[0], 2 * grid.h)
        coarse_e, _ = _raw_solve(v_values[::2], coarse, params, k)
        refined = (4.0 * energies - coarse_e) / 3.0
    pairs = []
    for i, (e, vec) in enumerate(zip(refined, vectors)):
        psi = np.concatenate(([0.0], vec, [0.0]))
        psi /= math.sqrt(np.sum(psi ** 2) * grid.h)
        lead = psi[np.flatnonzero(np.abs(psi) > 1e-3 * np.max(np.abs(psi)))[0]]
        if lead < 0:
            psi = -psi
        pairs.append(EigenPair(float(e), psi, _node_count(psi), grid, float(energies[i]), i))
    return pairs


def auto_extent(v: Callable[[np.ndarray], np.ndarray], params: SystemParams, energy: float,
                decay: float = 30.0, step: float = 0.01) -> float:
    """Half-width at which a state of ``energy`` has decayed by exp(-decay) past its turning point.

    The WKB exponent integral sqrt(2 m_r (v - E))/hbar is accumulated outward
    from the classical turning point.  The result is never below 1.5 times the
    turning point.
    """
    x = 0.0
    while float(v(np.array(x))) < energy:
        x += step
        if x > 1e6:
            raise DomainError("potential never exceeds the requested energy")
    turning = x
    exponent = 0.0
    while exponent < decay:
        x += step
        exponent += step * math.sqrt(max(0.0, 2 * params.m_r * (float(v(np.array(x))) - energy))) / params.hbar
    return max(x, 1.5 * turning)


def _log_abs_interpolator(x_nodes, logs):
    slope_lo = (logs[1] - logs[0]) / (x_nodes[1] - x_nodes[0])
    slope_hi = (logs[-1] - logs[-2]) / (x_nodes[-1] - x_nodes[-2])

    def log_factor(x):
        x = np.asarray(x, dtype=float)
        out = np.interp(x, x_nodes, logs)
        out = np.where(x < x_nodes[0], logs[0] + slope_lo * (x - x_nodes[0]), out)
        return np.where(x > x_nodes[-1], logs[-1] + slope_hi * (x - x_nodes[-1]), out)

    return log_factor


def make_reference_from_numeric(ground: EigenPair, grid: Grid | None = None,
                                params: SystemParams | None = None) -> ReferenceState:
    """1D reference from a nodeless oracle state.

    ln|psi| is interpolated linearly between the nodes where |psi| >= EPS_NODE;
    the log-derivative is the central difference of ln|psi| interpolated the
    same way.  ``domain`` is the symmetric half-width inside which every node
    clears the guard.
    """
    if ground.node_count != 0:
        raise DomainError(f"reference must be nodeless, state {ground.index} has {ground.node_count} nodes")
    grid = grid or ground.grid
    if grid.dim != 1:
        raise DomainError("numeric references are built per axis from 1D grids")
    x = ground.grid.axis(0)
    psi = ground.wavefunction
    alive = np.abs(psi) >= EPS_NODE
    half = float(min(-x[alive].min(), x[alive].max()))
    inside = np.abs(x) <= half + 1e-12
    if np.count_nonzero(inside) < 3:
        raise DomainError("reference has fewer than three nodes above the node guard")
    xs = x[inside]
    logs = np.log(np.abs(psi[inside]))
    log_factor = _log_abs_interpolator(xs, logs)
    slopes = np.gradient(logs, xs, edge_order=2)
    log_deriv = _log_abs_interpolator(xs, slopes)

    def factor(x):
        return np.exp(log_factor(x))

    return ReferenceState(
        factors=(factor,),
        log_factors=(log_factor,),
        log_derivs=(log_deriv,),
        energy_m=ground.energy,
        log_peak=float(logs.max()),
        com_momentum=(0.0,),
        source="numeric",
        label=f"numeric:{ground.index}",
        domain=(half,),
        hbar=1.0 if params is None else params.hbar,
    )


def separable_reference(axis_refs: Sequence[ReferenceState], params: SystemParams) -> ReferenceState:
    """Product reference from 1D references; energies and log peaks add."""
    domains = [r.domain[0] if r.domain is not None else math.inf for r in axis_refs]
    return ReferenceState(
        factors=tuple(r.factors[0] for r in axis_refs),
        log_factors=tuple(r.log_factors[0] for r in axis_refs),
        log_derivs=tuple(r.log_derivs[0] for r in axis_refs),
        energy_m=float(sum(r.energy_m for r in axis_refs)),
        log_peak=float(sum(r.log_peak for r in axis_refs)),
        com_momentum=(0.0,) * len(axis_refs),
        source="numeric",
        label=",".join(r.label for r in axis_refs),
        domain=tuple(domains),
        hbar=params.hbar,
    )


def _spline_factor(pair: EigenPair):
    x = pair.grid.axis(0)
    spline = CubicSpline(x, pair.wavefunction)
    lo, hi = x[0], x[-1]

    def psi(x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= lo) & (x <= hi), spline(np.clip(x, lo, hi)), 0.0)

    return psi


def separable_compose(axis_states: Sequence[EigenPair], params: SystemParams) -> StateSpec:
    """Product state prod_j psi_j(x_j) with E = sum_j E_j; node counts become the quantum numbers."""
    if not 1 <= len(axis_states) <= 3:
        raise DomainError("compose one to three axis states")
    first = axis_states[0].grid
    for pair in axis_states[1:]:
        if pair.grid != first:
            raise DomainError("axis states were solved on different grids")
    counts = [p.node_count for p in axis_states]
    label = ",".join(str(c) for c in counts)
    return StateSpec(
        QuantumNumbers(*counts),
        float(sum(p.energy for p in axis_states)),
        tuple(_spline_factor(p) for p in axis_states),
        f"numeric:{label}",
    )


def write_eigenpairs_csv(stream, pairs: Sequence[EigenPair]) -> int:
    """One block per state: a ``# state=<i> energy=<E>`` line, then ``x,psi`` rows."""
    writer = csv.writer(stream, lineterminator="\n")
    for pair in pairs:
        stream.write(f"# state={pair.index} energy={pair.energy!r} raw_energy={pair.raw_energy!r} "
                     f"nodes={pair.node_count}\n")
        writer.writerow(["x", "psi"])
        for x, v in zip(pair.grid.axis(0), pair.wavefunction):
            writer.writerow([repr(float(x)), repr(float(v))])
    return len(pairs)


def lobe_reference(pair: EigenPair, lo: float, hi: float, params: SystemParams):
    """Reference from one node-free lobe [lo, hi] of an excited state, recentred at 0.

    Grids are symmetric about the origin, so the lobe is described in the
    shifted coordinate u = x - center.  Returns ``(reference, center)``; a
    state used with this reference must be shifted the same way (see
    :func:`shift_state`).
    """
    x = pair.grid.axis(0)
    h = pair.grid.h
    center = round(0.5 * (lo + hi) / h) * h
    half = math.floor(min(center - lo, hi - center) / h + 1e-9) * h
    inside = np.abs(x - center) <= half + 1e-9 * h
    psi = pair.wavefunction[inside]
    if np.count_nonzero(inside) < 5:
        raise DomainError("lobe is narrower than five grid nodes")
    if np.any(np.abs(psi) < EPS_NODE) or np.any(np.signbit(psi) != np.signbit(psi[0])):
        raise DomainError(f"state {pair.index} has a node or falls below the guard inside [{lo}, {hi}]")
    u = x[inside] - center
    logs = np.log(np.abs(psi))
    log_factor = _log_abs_interpolator(u, logs)
    log_deriv = _log_abs_interpolator(u, np.gradient(logs, u, edge_order=2))

    def factor(x):
        return np.exp(log_factor(x))

    ref = ReferenceState(
        factors=(factor,),
        log_factors=(log_factor,),
        log_derivs=(log_deriv,),
        energy_m=pair.energy,
        log_peak=float(logs.max()),
        com_momentum=(0.0,),
        source="numeric",
        label=f"numeric:{pair.index}@{center!r}",
        domain=(float(half),),
        hbar=params.hbar,
    )
    return ref, float(center)


def shift_state(state: StateSpec, center: float) -> StateSpec:
    """The same state in the coordinate u = x - center."""
    factors = tuple((lambda u, f=f: f(np.asarray(u, dtype=float) + center)) if j == 0 else f
                    for j, f in enumerate(state.factors))
    return StateSpec(state.quantum_numbers, state.energy, factors, state.label)
