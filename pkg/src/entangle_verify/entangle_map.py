"""The entangling map: real (X, x, t) to complex (Z, z, s) and back.

The map leaves both position vectors untouched and shifts time by
``i * tau(x)`` with ``tau = (hbar/E) ln|Psi'_I(x)|``, so ``s = t + i tau`` is
shared by both particles.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core_model import (
    LOG_EPS_NODE,
    DomainError,
    Grid,
    QuantumNumbers,
    ReferenceState,
    SingularityError,
    StateSpec,
    SystemParams,
    com_split,
)
from .oscillator import energy_of, ground_state, hermite, wavefunction

TAU_NORMALIZATIONS = ("keep", "drop")


@dataclass(frozen=True)
class EntangledPoint:
    Z: np.ndarray
    z: np.ndarray
    s: np.ndarray
    conjugate: bool = False


def _check_normalization(normalization):
    if normalization not in TAU_NORMALIZATIONS:
        raise DomainError(f"tau normalization must be one of {TAU_NORMALIZATIONS}, got {normalization!r}")


def _checked_log_abs(reference: ReferenceState, x) -> np.ndarray:
    logs = np.asarray(reference.log_abs(x), dtype=float)
    bad = ~(logs >= LOG_EPS_NODE)
    if reference.domain is not None:
        xs = np.asarray(x, dtype=float)
        if reference.dim == 1 and (xs.ndim == 0 or xs.shape[-1] != 1):
            xs = xs[..., None]
        bad |= np.any(np.abs(xs) > np.asarray(reference.domain) + 1e-12, axis=-1)
    if np.any(bad):
        flat = np.asarray(x, dtype=float).reshape(-1, reference.dim) if np.ndim(x) else np.atleast_1d(x)
        point = tuple(np.atleast_1d(flat[int(np.flatnonzero(bad.ravel())[0])]).tolist())
        raise SingularityError(f"|Psi'_I| below node guard at x={point}", point=point)
    return logs


def tau(reference: ReferenceState, E: float, x, normalization: str = "keep"):
    """Imaginary time offset (hbar/E) ln|Psi'_I(x)|.

    With ``normalization="drop"`` the peak value of ln|Psi'_I| is subtracted,
    which for the oscillator removes the (3/4) ln(m_r omega / pi hbar) term.
    """
    _check_normalization(normalization)
    if E == 0:
        raise DomainError("the entangling map is undefined for E = 0")
    logs = _checked_log_abs(reference, x)
    if normalization == "drop":
        logs = logs - reference.log_peak
    out = reference.hbar / E * logs
    return float(out) if np.ndim(out) == 0 else out


def to_entangled(X, x, t, reference: ReferenceState, E: float, normalization: str = "keep") -> EntangledPoint:
    offset = tau(reference, E, x, normalization)
    return EntangledPoint(
        Z=np.asarray(X, dtype=float) + 0j,
        z=np.asarray(x, dtype=float) + 0j,
        s=np.asarray(t, dtype=float) + 1j * np.asarray(offset),
    )


def to_conjugate(X, x, t, reference: ReferenceState, E: float, normalization: str = "keep") -> EntangledPoint:
    offset = tau(reference, E, x, normalization)
    return EntangledPoint(
        Z=np.asarray(X, dtype=float) + 0j,
        z=np.asarray(x, dtype=float) + 0j,
        s=np.asarray(t, dtype=float) - 1j * np.asarray(offset),
        conjugate=True,
    )


def from_entangled(p: EntangledPoint, reference: ReferenceState, E: float, normalization: str = "keep"):
    """Invert either map; returns real (X, x, t)."""
    x = np.real(p.z)
    offset = tau(reference, E, x, normalization)
    t = p.s + 1j * offset if p.conjugate else p.s - 1j * offset
    scale = max(1.0, float(np.max(np.abs(p.s))))
    if np.max(np.abs(np.imag(t))) > 1e-12 * scale:
        raise DomainError("point was not produced by a forward map with this reference and energy")
    return np.real(p.Z), x, np.real(t)


def particle_coordinates(x1, x2, t, reference: ReferenceState, E: float, params: SystemParams,
                         normalization: str = "keep"):
    """Per-particle entangled coordinates (z^1, z^2, s); s is common to both particles."""
    _, x = com_split(x1, x2, params)
    offset = tau(reference, E, x, normalization)
    s = np.asarray(t, dtype=float) + 1j * np.asarray(offset)
    return np.asarray(x1, dtype=float) + 0j, np.asarray(x2, dtype=float) + 0j, s


def entangled_wavefunction(l, p: EntangledPoint, params: SystemParams, E: float | None = None):
    """Oscillator state written in (z, s): Hermite product times exp(-i E s / hbar), no Gaussian."""
    if not isinstance(l, QuantumNumbers):
        l = QuantumNumbers(*l)
    if E is None:
        E = energy_of(l.n, params)
    k = params.oscillator_scale
    log_norm = 0.75 * math.log(k / math.pi) - 0.5 * (
        l.n * math.log(2.0) + sum(math.lgamma(v + 1) for v in l.as_tuple()))
    zeta = math.sqrt(k) * np.real(np.asarray(p.z))
    poly = np.ones(zeta.shape[:-1])
    for j, lj in enumerate(l.as_tuple()):
        poly = poly * hermite(lj, zeta[..., j])
    s = p.s
    return math.exp(log_norm) * poly * np.exp(-1j * E * s / params.hbar)


def entangled_amplitude(state: StateSpec, reference: ReferenceState):
    """theta(z) = Psi_I(z) / |Psi'_I(z)|, the z-dependent factor of a state in (z, s).

    For any stationary state Psi = theta(z) exp(-i E s / hbar) exactly when the
    map uses the state's own energy and the normalization is kept.
    """

    def theta(z):
        return state.psi_I(z) * np.exp(-_checked_log_abs(reference, z))

    return theta


@dataclass(frozen=True)
class RatioStats:
    mean: complex
    relative_spread: float
    count: int


def expected_ratio_constant(params: SystemParams, normalization: str = "keep", dim: int = 3) -> float:
    _check_normalization(normalization)
    if normalization == "drop":
        return 1.0
    return (params.oscillator_scale / math.pi) ** (dim / 4)


def consistency_ratio(l, grid: Grid, t: float, params: SystemParams, normalization: str = "keep") -> RatioStats:
    """Pointwise ratio of the (z, s) oscillator form, composed with the map, to the real-space form.

    Nodes where the reference falls below the node guard, and nodes where the
    real-space wavefunction vanishes, are left out.
    """
    if not isinstance(l, QuantumNumbers):
        l = QuantumNumbers(*l)
    if grid.dim != 3:
        raise DomainError("consistency_ratio needs a 3D grid")
    reference = ground_state(params)
    E = energy_of(l.n, params)
    x = grid.nodes()
    admitted = reference.log_abs(x) >= LOG_EPS_NODE
    x = x[admitted]
    if x.shape[0] == 0:
        raise SingularityError("no grid node clears the node guard")
    p = to_entangled(np.zeros_like(x), x, t, reference, E, normalization)
    numerator = entangled_wavefunction(l, p, params, E)
    denominator = wavefunction(l, x, t, params)
    ok = np.abs(denominator) > 1e-280
    ratio = numerator[ok] / denominator[ok]
    mean = complex(np.mean(ratio))
    spread = float(np.sqrt(np.mean(np.abs(ratio - mean) ** 2)) / abs(mean))
    return RatioStats(mean, spread, int(ratio.size))


def tau_field_rows(reference: ReferenceState, E: float, grid: Grid, normalization: str = "keep"):
    """(coords..., |Psi'_I|, tau) for every node that clears the node guard, in node order."""
    x = grid.nodes()
    logs = reference.log_abs(x)
    admitted = logs >= LOG_EPS_NODE
    if reference.domain is not None:
        admitted &= np.all(np.abs(x) <= np.asarray(reference.domain) + 1e-12, axis=-1)
    x = x[admitted]
    offsets = np.atleast_1d(tau(reference, E, x, normalization))
    amplitude = np.exp(logs[admitted])
    return x, amplitude, offsets


def write_tau_csv(stream, reference: ReferenceState, E: float, grid: Grid, normalization: str = "keep"):
    x, amplitude, offsets = tau_field_rows(reference, E, grid, normalization)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow([f"x{i + 1}" for i in range(grid.dim)] + ["abs_psi_ref", "tau"])
    for coords, a, t in zip(x, amplitude, offsets):
        writer.writerow([repr(float(c)) for c in coords] + [repr(float(a)), repr(float(t))])
    return len(offsets)
