import io
import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from entangle_verify import spectral_oracle
from entangle_verify.core_model import ConvergenceError, DomainError, make_grid
from entangle_verify.oscillator import ground_state
from entangle_verify.residuals import oscillator_potential, quartic_potential
from entangle_verify.spectral_oracle import (
    auto_extent,
    make_reference_from_numeric,
    separable_compose,
    solve_1d,
    sturm_count,
    tridiagonal,
    write_eigenpairs_csv,
)


@pytest.fixture(scope="module")
def harmonic(params):
    # extent 12, 2401 points
    grid = make_grid(12.0, 0.01)
    return solve_1d(oscillator_potential(params, 1).v(grid.axis(0)), grid, params, k=6)


@pytest.fixture(scope="module")
def quartic_pairs(params):
    grid = make_grid(5.0, 0.01)
    return solve_1d(quartic_potential().v(grid.axis(0)), grid, params, k=8)


def test_grid_has_2401_points(harmonic):
    assert harmonic[0].grid.points == (2401,)


@pytest.mark.parametrize("n", [0, 3])
def test_harmonic_energies(harmonic, n):
    assert harmonic[n].energy == pytest.approx(n + 0.5, abs=1e-4)


def test_all_harmonic_energies(harmonic):
    np.testing.assert_allclose([p.energy for p in harmonic], np.arange(6) + 0.5, atol=1e-4)


def test_raw_energies_converge_at_order_two(params):
    errors = []
    for h in (0.04, 0.02, 0.01):
        grid = make_grid(12.0, h)
        pair = solve_1d(oscillator_potential(params, 1).v(grid.axis(0)), grid, params, refine=False)[0]
        errors.append(abs(pair.raw_energy - 0.5))
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    assert all(o == pytest.approx(2.0, abs=0.05) for o in orders)


def test_matches_scipy_tridiagonal(params, quartic_pairs):
    # LAPACK's tridiagonal eigensolver is an independent oracle for the raw eigenvalues
    grid = quartic_pairs[0].grid
    diag, off = tridiagonal(quartic_potential().v(grid.axis(0)), grid.h, params)
    want = eigh_tridiagonal(diag, off, select="i", select_range=(0, 7), eigvals_only=True)
    np.testing.assert_allclose([p.raw_energy for p in quartic_pairs], want, rtol=1e-12, atol=1e-12)


def test_quartic_sturm_property(quartic_pairs):
    energies = [p.energy for p in quartic_pairs]
    assert all(a < b for a, b in zip(energies, energies[1:]))
    assert [p.node_count for p in quartic_pairs] == list(range(len(quartic_pairs)))


def test_sturm_count_brackets(params, quartic_pairs):
    grid = quartic_pairs[0].grid
    diag, off = tridiagonal(quartic_potential().v(grid.axis(0)), grid.h, params)
    raw = np.array([p.raw_energy for p in quartic_pairs])
    gaps = np.diff(raw).min()
    np.testing.assert_array_equal(sturm_count(diag, off, raw - 0.25 * gaps), np.arange(raw.size))
    np.testing.assert_array_equal(sturm_count(diag, off, raw + 0.25 * gaps), np.arange(raw.size) + 1)


def test_orthonormal(harmonic):
    psi = np.array([p.wavefunction for p in harmonic])
    gram = psi @ psi.T * harmonic[0].grid.h
    assert np.abs(gram - np.eye(len(harmonic))).max() <= 1e-8
    assert all(abs(p.norm() - 1) <= 1e-10 for p in harmonic)


@pytest.mark.parametrize("k", [0, 13, 2.5])
def test_k_out_of_range(params, k):
    grid = make_grid(4.0, 0.1)
    with pytest.raises(DomainError):
        solve_1d(grid.axis(0) ** 2, grid, params, k=k)


def test_rejects_bad_samples(params):
    grid = make_grid(4.0, 0.1)
    with pytest.raises(DomainError):
        solve_1d(np.ones(5), grid, params)
    v = grid.axis(0) ** 2
    v[3] = np.nan
    with pytest.raises(DomainError):
        solve_1d(v, grid, params)


def test_bisection_cap_raises(params, monkeypatch):
    monkeypatch.setattr(spectral_oracle, "BISECTION_CAP", 3)
    grid = make_grid(4.0, 0.1)
    with pytest.raises(ConvergenceError):
        solve_1d(grid.axis(0) ** 2, grid, params)


def test_auto_extent_covers_the_tail(params):
    v = oscillator_potential(params, 1).v
    extent = auto_extent(v, params, 0.5)
    # turning point at 1, and the Gaussian must be far below 1e-12 at the wall
    assert extent >= 1.5
    assert math.exp(-0.5 * extent ** 2) < 1e-12


# ---------------------------------------------------------------------------
# references and composition


def test_numeric_reference_log_derivative(params, harmonic):
    ref = make_reference_from_numeric(harmonic[0], params=params)
    x = np.linspace(-4, 4, 801)
    assert np.abs(ref.log_derivs[0](x) + params.m_r * params.omega / params.hbar * x).max() <= 1e-3
    assert ref.energy_m == harmonic[0].energy
    assert ref.source == "numeric"


def test_numeric_reference_matches_closed_form(params, harmonic):
    ref = make_reference_from_numeric(harmonic[0], params=params)
    closed = ground_state(params, dim=1)
    x = np.linspace(-3, 3, 61)
    np.testing.assert_allclose(ref.factors[0](x), closed.factors[0](x), atol=1e-4)


def test_quartic_reference_clipped(params, quartic_pairs):
    ref = make_reference_from_numeric(quartic_pairs[0], params=params)
    assert ref.domain[0] < quartic_pairs[0].grid.extent[0]
    edge = np.array([ref.domain[0]])
    assert ref.factors[0](edge)[0] >= 1e-12


def test_nodal_reference_rejected(params, harmonic):
    with pytest.raises(DomainError):
        make_reference_from_numeric(harmonic[1], params=params)


def test_compose_grounds(params, harmonic):
    state = separable_compose([harmonic[0]] * 3, params)
    assert state.energy == pytest.approx(1.5, abs=1e-4)
    closed = ground_state(params)
    pts = np.random.default_rng(7).uniform(-2.5, 2.5, size=(50, 3))
    np.testing.assert_allclose(state.psi_I(pts), closed.psi_I(pts), atol=1e-3)


def test_compose_one_excited_axis(params, harmonic):
    state = separable_compose([harmonic[1], harmonic[0], harmonic[0]], params)
    assert state.energy == pytest.approx(2.5, abs=1e-4)
    assert state.quantum_numbers.as_tuple() == (1, 0, 0)


def test_compose_rejects_mixed_grids(params, harmonic, quartic_pairs):
    with pytest.raises(DomainError):
        separable_compose([harmonic[0], quartic_pairs[0]], params)


def test_eigenpair_csv(harmonic):
    out = io.StringIO()
    assert write_eigenpairs_csv(out, harmonic[:2]) == 2
    lines = out.getvalue().splitlines()
    assert lines[0].startswith("# state=0 energy=")
    assert lines[1] == "x,psi"
    assert len(lines) == 2 * (2 + 2401)
    x, psi = map(float, lines[2].split(","))
    assert x == -12.0 and psi == 0.0
