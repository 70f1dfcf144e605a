"""Closed-form isotropic harmonic oscillator states in Cartesian product form."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from .core_model import (
    DomainError,
    QuantumNumbers,
    ReferenceState,
    StateSpec,
    SystemParams,
)

MAX_L = 40


def hermite(l: int, xi):
    """Physicists' Hermite polynomial H_l(xi) by the three-term recurrence."""
    if int(l) != l or not 0 <= l <= MAX_L:
        raise DomainError(f"Hermite degree must be an integer in [0, {MAX_L}], got {l!r}")
    xi = np.asarray(xi, dtype=float)
    h_prev = np.ones_like(xi)
    if l == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = 2.0 * xi
    for k in range(1, int(l)):
        h_prev, h = h, 2.0 * xi * h - 2.0 * k * h_prev
    return h if h.ndim else float(h)


def energy_of(n: int, params: SystemParams, dim: int = 3) -> float:
    """E_n = hbar * omega * (n + dim/2)."""
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    return params.hbar * params.omega * (2 * int(n) + dim) / 2


def _log_norm_1d(l: int, params: SystemParams) -> float:
    return 0.25 * math.log(params.oscillator_scale / math.pi) - 0.5 * (l * math.log(2.0) + gammaln(l + 1))


def hermite_function(l: int, params: SystemParams):
    """Normalized 1D oscillator eigenfunction of degree ``l`` as a vectorized callable."""
    if int(l) != l or not 0 <= l <= MAX_L:
        raise DomainError(f"Hermite degree must be an integer in [0, {MAX_L}], got {l!r}")
    l = int(l)
    log_norm = _log_norm_1d(l, params)
    root = math.sqrt(params.oscillator_scale)

    def psi(x):
        xi = root * np.asarray(x, dtype=float)
        # The Gaussian and the normalization are combined in the exponent so
        # that neither overflows for large l or |xi|.
        return hermite(l, xi) * np.exp(log_norm - 0.5 * xi * xi)

    return psi


def eigenstate(l, params: SystemParams, dim: int = 3) -> StateSpec:
    """Stationary oscillator state with quantum numbers ``l``.

    With ``dim=1`` only ``l1`` is used and the energy is hbar*omega*(l1 + 1/2).
    """
    if not isinstance(l, QuantumNumbers):
        l = QuantumNumbers(*l) if np.ndim(l) else QuantumNumbers(int(l))
    ls = l.as_tuple()[:dim]
    if dim == 1 and (l.l2 or l.l3):
        raise DomainError("a 1D state takes a single quantum number")
    factors = tuple(hermite_function(lj, params) for lj in ls)
    n = sum(ls)
    label = ",".join(str(v) for v in ls)
    return StateSpec(l, energy_of(n, params, dim), factors, label)


def wavefunction(l, x, t, params: SystemParams):
    """Full time-dependent oscillator wavefunction Psi(x, t) with the center of mass at rest."""
    state = eigenstate(l, params)
    return state.psi_I(x) * np.exp(-1j * state.energy * np.asarray(t) / params.hbar)


def ground_state(params: SystemParams, dim: int = 3) -> ReferenceState:
    """Nodeless Gaussian ground state with its log-derivative in closed form."""
    k = params.oscillator_scale
    log_c = 0.25 * math.log(k / math.pi)

    def log_factor(x):
        x = np.asarray(x, dtype=float)
        return log_c - 0.5 * k * x * x

    def factor(x):
        return np.exp(log_factor(x))

    def log_deriv(x):
        return -k * np.asarray(x, dtype=float)

    return ReferenceState(
        factors=(factor,) * dim,
        log_factors=(log_factor,) * dim,
        log_derivs=(log_deriv,) * dim,
        energy_m=energy_of(0, params, dim),
        log_peak=dim * log_c,
        com_momentum=(0.0,) * dim,
        source="closed-form",
        label=",".join("0" * dim),
        hbar=params.hbar,
    )
