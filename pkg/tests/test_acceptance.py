"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints one ``ACCEPTANCE <n> PASS|FAIL`` line (collected again in
the terminal summary) and then asserts.  Criteria 2-5 are limited by order-4
truncation at h = 0.05 and are expected to fail; nothing here is relaxed to
hide that.
"""
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from entangle_verify.cli import main
from entangle_verify.core_model import NATURAL, make_grid, norm2
from entangle_verify.diffcalc import (
    cr_pair_residual,
    cr_residual,
    d_dz,
    d_dz_conj,
    ladder_apply,
    mixed_second,
    number_operator_check,
    observed_order,
    probe_rectangle,
)
from entangle_verify.entangle_map import consistency_ratio, expected_ratio_constant
from entangle_verify.oscillator import eigenstate, energy_of, ground_state
from entangle_verify.residuals import (
    SuiteConfig,
    oscillator_potential,
    residual_entangled,
    residual_relative,
    run_suite,
)
from entangle_verify.spectral_oracle import solve_1d

RESULTS = []

H, EXTENT, ORDER = 0.05, 8.0, 4


def record(n, ok, detail):
    line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def triples(n):
    return [(a, b, n - a - b) for a in range(n, -1, -1) for b in range(n - a, -1, -1)]


def states_up_to(n_max):
    return [l for n in range(n_max + 1) for l in triples(n)]


@pytest.fixture(scope="module")
def grid():
    return make_grid(EXTENT, H, 3)


@pytest.fixture(scope="module")
def ref():
    return ground_state(NATURAL)


def test_1_energy_spectrum():
    start = time.perf_counter()
    values = [energy_of(n, NATURAL) for n in range(21)]
    elapsed = time.perf_counter() - start
    # 2 E_n / (hbar omega) = 3 + 2n is an exact integer for every n
    exact = all(2 * e == 3 + 2 * n for n, e in enumerate(values))
    record(1, exact and elapsed < 1e-3, f"E_n = (3/2 + n) exact for n <= 20: {exact}; {elapsed * 1e3:.3f} ms")


def test_2_relative_residual(grid, ref):
    potential = oscillator_potential(NATURAL)
    mask = ref.node_mask(grid)
    start = time.perf_counter()
    worst, failing = 0.0, []
    for l in states_up_to(6):
        r = residual_relative(eigenstate(l, NATURAL), potential, NATURAL, grid, ORDER, 1e-6, mask=mask)
        worst = max(worst, r.residual_rms)
        if not r.passed:
            failing.append(r.n)
    elapsed = time.perf_counter() - start
    record(2, not failing and elapsed < 10,
           f"max residual {worst:.3e} (tol 1e-6), {len(failing)}/{len(states_up_to(6))} states over; {elapsed:.1f} s")


def test_3_potential_elimination(grid, ref):
    start = time.perf_counter()
    worst, failing = 0.0, []
    for l in states_up_to(6):
        r = residual_entangled(eigenstate(l, NATURAL), ref, NATURAL, grid, ORDER, 1e-6)
        worst = max(worst, r.residual_rms)
        if not r.passed:
            failing.append(r.n)
    elapsed = time.perf_counter() - start
    record(3, not failing and elapsed < 10,
           f"max residual {worst:.3e} (tol 1e-6), {len(failing)}/{len(states_up_to(6))} states over; {elapsed:.1f} s")


def test_4_mixed_derivative_identity(grid, ref):
    worst = max(mixed_second(eigenstate(l, NATURAL), ref, grid, ORDER).max_discrepancy for l in states_up_to(6))
    state = eigenstate((2, 1, 0), NATURAL)
    spacings = [0.1, 0.05, 0.025]
    gaps = [mixed_second(state, ref, make_grid(EXTENT, h, 3), ORDER).max_discrepancy for h in spacings]
    orders = observed_order(spacings, gaps)
    ok = worst <= 1e-6 and min(orders) >= 3.5
    record(4, ok, f"max discrepancy {worst:.3e} at h 0.05 (tol 1e-6); observed orders "
                  + ", ".join(f"{o:.2f}" for o in orders))


def test_5_ladder_algebra(grid, ref):
    coeff_err = 0.0
    for l in states_up_to(4):
        state = eigenstate(l, NATURAL)
        for axis in (1, 2, 3):
            li = l[axis - 1]
            if li > 0:
                res = ladder_apply(state, ref, axis, "lower", NATURAL, grid, ORDER)
                coeff_err = max(coeff_err, abs(res.coefficient - math.sqrt(li)))
            res = ladder_apply(state, ref, axis, "raise", NATURAL, grid, ORDER)
            coeff_err = max(coeff_err, abs(res.coefficient - math.sqrt(li + 1)))
    energy_err = 0.0
    for l in states_up_to(4):
        check = number_operator_check(eigenstate(l, NATURAL), ref, NATURAL, grid, ORDER)
        e = energy_of(sum(l), NATURAL)
        energy_err = max(energy_err, abs(check.lhs_energy - e) / e)
    zero = ladder_apply(eigenstate((0, 0, 0), NATURAL), ref, 1, "lower", NATURAL, grid, ORDER).orthogonal_residual
    ok = coeff_err <= 1e-6 and energy_err <= 1e-6 and zero <= 1e-8
    record(5, ok, f"coefficient error {coeff_err:.3e}, number-operator relative error {energy_err:.3e} "
                  f"(tol 1e-6), ground annihilation {zero:.3e} (tol 1e-8)")


def test_6_holomorphy():
    E = energy_of(0, NATURAL)
    probe = probe_rectangle(lambda s: np.exp(-1j * E * s / NATURAL.hbar))
    laplace, pair = cr_residual(probe), cr_pair_residual(probe)
    negative = cr_pair_residual(probe_rectangle(np.conj))
    ok = laplace.residual_rms <= 1e-8 and pair.residual_rms <= 1e-8 and not negative.passed
    record(6, ok, f"exp: laplace {laplace.residual_rms:.3e}, pair {pair.residual_rms:.3e} (tol 1e-8); "
                  f"conj pair {negative.residual_rms:.3e} flagged={not negative.passed}")


def test_7_map_consistency():
    probe = make_grid(4.0, 0.1, 3)
    spread, drop_off, keep_off = 0.0, 0.0, 0.0
    keep_const = expected_ratio_constant(NATURAL, "keep")
    for l in [(0, 0, 0), (1, 0, 0), (2, 1, 0), (1, 1, 1)]:
        for mode in ("keep", "drop"):
            stats = consistency_ratio(l, probe, 0.5, NATURAL, mode)
            spread = max(spread, stats.relative_spread)
            if mode == "drop":
                drop_off = max(drop_off, abs(stats.mean - 1.0))
            else:
                keep_off = max(keep_off, abs(stats.mean - keep_const))
    closed = (NATURAL.m_r * NATURAL.omega / (math.pi * NATURAL.hbar)) ** 0.75
    ok = spread <= 1e-8 and drop_off <= 1e-8 and keep_off <= 1e-8 and abs(keep_const - closed) <= 1e-15
    record(7, ok, f"spread {spread:.3e}, |drop - 1| {drop_off:.3e}, |keep - (m_r w/pi hbar)^(3/4)| "
                  f"{keep_off:.3e} (tol 1e-8)")


def test_8_oracle_extension():
    start = time.perf_counter()
    grid1 = make_grid(12.0, 0.01)
    pairs = solve_1d(oscillator_potential(NATURAL, 1).v(grid1.axis(0)), grid1, NATURAL, k=12)
    spectrum_err = max(abs(p.energy - (i + 0.5)) for i, p in enumerate(pairs))
    reports = run_suite(SuiteConfig(suite="oracle", potential="quartic"))
    quartic = [r for r in reports if r.check_name.startswith("oracle_entangled")]
    worst = max(r.residual_rms for r in quartic)
    elapsed = time.perf_counter() - start
    ok = grid1.points == (2401,) and spectrum_err <= 1e-4 and worst <= 1e-4 and elapsed < 30
    record(8, ok, f"harmonic n < 12 max error {spectrum_err:.3e} (tol 1e-4, 2401 points); quartic "
                  f"entangled max {worst:.3e} over {len(quartic)} states (tol 1e-4); {elapsed:.1f} s")


def test_9_energy_cancellation(grid, ref):
    worst = 0.0
    for l in [(1, 0, 0), (2, 1, 0)]:
        base = eigenstate(l, NATURAL)
        mask = ref.node_mask(grid)
        for op in (d_dz, d_dz_conj):
            fields = [op(replace(base, energy=E), ref, 1, grid, ORDER) for E in (1.5, 3.5, 7.5)]
            scale = math.sqrt(norm2(fields[0], mask))
            for f in fields[1:]:
                worst = max(worst, math.sqrt(norm2(f - fields[0], mask)) / scale)
    record(9, worst <= 1e-12, f"max relative field difference across E in {{1.5, 3.5, 7.5}}: {worst:.3e} "
                              "(tol 1e-12)")


def test_10_determinism_and_failure(tmp_path):
    outputs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        main(["verify", "--suite", "oscillator-core", "--out", str(path)])
        outputs.append(path.read_bytes())
    identical = outputs[0] == outputs[1]
    injected = main(["verify", "--suite", "oscillator-core", "--inject-energy-error", "0.1",
                     "--out", str(tmp_path / "bad.csv")])
    record(10, identical and injected == 1, f"byte-identical reports: {identical}; inject 0.1 exit {injected}")
