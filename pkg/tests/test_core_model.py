import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entangle_verify.core_model import (
    NATURAL,
    ComplexField,
    DomainError,
    EvaluationError,
    NodeMask,
    QuantumNumbers,
    ResidualReport,
    SeparableField,
    com_join,
    com_split,
    count,
    inner,
    make_grid,
    make_system,
    max_abs,
    norm2,
    sample,
    sample_factors,
)

masses = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
coords = st.lists(st.floats(min_value=-50, max_value=50, allow_nan=False), min_size=3, max_size=3)


@pytest.mark.parametrize("m1, m2, m_c, m_r", [
    (1, 1, 2.0, 0.5),
    (2, 2, 4.0, 1.0),
    (1, 3, 4.0, 0.75),
])
def test_make_system_examples(m1, m2, m_c, m_r):
    p = make_system(m1, m2, 1, 1)
    assert p.m_c == m_c
    assert p.m_r == m_r


@pytest.mark.parametrize("field", ["m1", "m2", "hbar", "omega"])
@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_make_system_rejects_non_positive(field, bad):
    kwargs = dict(m1=1.0, m2=1.0, hbar=1.0, omega=1.0)
    kwargs[field] = bad
    with pytest.raises(DomainError, match=field):
        make_system(**kwargs)


def test_natural_units():
    assert (NATURAL.m_r, NATURAL.m_c, NATURAL.hbar, NATURAL.omega) == (1.0, 4.0, 1.0, 1.0)


@pytest.mark.parametrize("x1, x2, m1, m2, X, x", [
    ((1, 0, 0), (-1, 0, 0), 1, 1, (0, 0, 0), (2, 0, 0)),
    ((3, 1, 2), (3, 1, 2), 5, 0.3, (3, 1, 2), (0, 0, 0)),
    ((1, 0, 0), (0, 0, 0), 1, 3, (0.25, 0, 0), (1, 0, 0)),
])
def test_com_split_examples(x1, x2, m1, m2, X, x):
    got_X, got_x = com_split(x1, x2, make_system(m1, m2))
    np.testing.assert_allclose(got_X, X, atol=1e-15)
    np.testing.assert_allclose(got_x, x, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(masses, masses, coords, coords)
def test_com_round_trip(m1, m2, x1, x2):
    p = make_system(m1, m2)
    y1, y2 = com_join(*com_split(x1, x2, p), p)
    scale = max(1.0, np.max(np.abs(x1)), np.max(np.abs(x2)))
    assert np.max(np.abs(y1 - x1)) <= 1e-14 * scale * 4
    assert np.max(np.abs(y2 - x2)) <= 1e-14 * scale * 4


@settings(max_examples=300, deadline=None)
@given(masses, masses)
def test_reduced_mass_bounds(m1, m2):
    p = make_system(m1, m2)
    assert p.m_r <= min(m1, m2) * (1 + 1e-15)
    assert p.m_r <= p.m_c / 4 * (1 + 1e-15)
    if m1 != m2:
        assert p.m_r < p.m_c / 4


def test_reduced_mass_equality_case():
    p = make_system(3.0, 3.0)
    assert p.m_r == p.m_c / 4


def test_make_grid_examples():
    g = make_grid(1, 0.5, 1)
    np.testing.assert_array_equal(g.axis(0), [-1, -0.5, 0, 0.5, 1])
    assert make_grid(8, 0.05, 1).points == (321,)
    g3 = make_grid(4, 1, 3)
    assert g3.size == 729 and g3.nodes().shape == (729, 3)


@pytest.mark.parametrize("extent, spacing", [(1.0, 0.3), (0.0, 0.1), (1.0, -0.1), (0.05, 0.1)])
def test_make_grid_rejects_bad_input(extent, spacing):
    with pytest.raises(DomainError):
        make_grid(extent, spacing)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=400), st.sampled_from([0.01, 0.05, 0.1, 0.25, 1.0]))
def test_grid_negation_symmetry(half, h):
    g = make_grid(half * h, h)
    x = g.axis(0)
    assert x.size % 2 == 1 and x[x.size // 2] == 0.0
    np.testing.assert_array_equal(x, -x[::-1])


def test_node_order_is_row_major_axis1_slowest():
    g = make_grid(1, 1, 3)
    nodes = g.nodes()
    np.testing.assert_array_equal(nodes[0], [-1, -1, -1])
    np.testing.assert_array_equal(nodes[1], [-1, -1, 0])
    np.testing.assert_array_equal(nodes[-1], [1, 1, 1])


def test_sample_examples():
    g = make_grid(2, 0.5, 3)
    assert np.all(sample(lambda x, y, z: 1.0, g).values == 1)
    g1 = make_grid(1, 1, 1)
    np.testing.assert_array_equal(sample(lambda x: x, g1).values, [-1, 0, 1])
    g2 = make_grid(1, 1, 1)
    assert abs(sample(lambda x: np.exp(-x * x / 2), g2).values[2] - 0.6065306597) < 1e-10


def test_sample_reports_bad_node():
    g = make_grid(1, 0.5, 1)
    with pytest.raises(EvaluationError) as info:
        sample(lambda x: 1.0 / x, g)
    assert info.value.node == (0.0,)


def test_complex_field_rejects_non_finite():
    g = make_grid(1, 0.5, 1)
    with pytest.raises(EvaluationError):
        ComplexField(g, np.array([1, 2, np.nan, 4, 5]))
    with pytest.raises(DomainError):
        ComplexField(g, np.ones(4))


def test_quantum_numbers():
    q = QuantumNumbers(2, 1, 0)
    assert q.n == 3 and q.label == "2,1,0"
    assert q.shifted(3, -1) is None
    assert q.shifted(1, -1) == QuantumNumbers(1, 1, 0)
    assert QuantumNumbers.parse("2, 0, 0") == QuantumNumbers(2)
    for bad in [(-1, 0, 0), (0.5, 0, 0)]:
        with pytest.raises(DomainError):
            QuantumNumbers(*bad)
    with pytest.raises(DomainError):
        QuantumNumbers.parse("a,b")


# separable fields against their dense expansion

def _random_field(rng, grid, rank, scale=1.0):
    terms = [tuple(rng.standard_normal(n) + 1j * rng.standard_normal(n) for n in grid.points)
             for _ in range(rank)]
    return SeparableField(grid, tuple(terms), 0, tuple(scale * rng.standard_normal(rank)))


def _dense_norm(a, mask, grid):
    adm = mask.with_margin(a.margin).dense(grid)
    return float(np.sum(np.abs(a.to_dense().values[adm]) ** 2))


@pytest.mark.parametrize("seed", range(4))
def test_separable_norms_match_dense(seed):
    rng = np.random.default_rng(seed)
    g = make_grid(1.5, 0.1, 3)
    a = _random_field(rng, g, 3)
    b = _random_field(rng, g, 2)
    logs = tuple(-3.0 * g.axis(i) ** 2 for i in range(3))
    for mask in (NodeMask(), NodeMask(margin=2), NodeMask(log_amplitude=logs, log_floor=-4.0)):
        adm = mask.dense(g)
        want = np.sum(np.conj(a.values[adm]) * b.values[adm])
        assert abs(inner(a, b, mask) - want) <= 1e-10 * max(1.0, abs(want))
        assert math.isclose(norm2(a, mask), _dense_norm(a, mask, g), rel_tol=1e-12)
        assert math.isclose(max_abs(a, mask), np.abs(a.values[adm]).max(), rel_tol=1e-13)


@pytest.mark.parametrize("floor", [-30.0, -4.0, -1.0])
def test_real_field_max_matches_dense(floor):
    rng = np.random.default_rng(11)
    g = make_grid(1.5, 0.1, 3)
    terms = tuple(tuple(rng.standard_normal(n) for n in g.points) for _ in range(4))
    a = SeparableField(g, terms, 0)
    logs = tuple(-3.0 * g.axis(i) ** 2 for i in range(3))
    mask = NodeMask(log_amplitude=logs, log_floor=floor)
    assert math.isclose(max_abs(a, mask), np.abs(a.values[mask.dense(g)]).max(), rel_tol=1e-13)


def test_cancelling_terms_keep_full_precision():
    # two large terms on different axes that cancel to a tiny remainder
    g = make_grid(2, 0.1, 3)
    psi = np.exp(-g.axis(0) ** 2)
    eps = 1e-9 * np.sin(g.axis(0))
    a = SeparableField(g, ((psi + eps, psi, psi), (psi, -psi, psi)))
    exact = _dense_norm(a, NodeMask(), g)
    assert math.isclose(norm2(a), exact, rel_tol=1e-6)


def test_compress_merges_scaled_copies():
    g = make_grid(1, 0.25, 3)
    f = sample_factors([np.cos, np.cos, np.cos], g)
    total = 2.0 * f + (-2.0) * f
    assert total.rank == 0
    assert norm2(total) == 0.0
    two = f + 3.0 * f.multiply_axis(1, g.axis(1))
    assert two.rank == 1


def test_count_respects_margin_and_floor():
    g = make_grid(1, 0.25, 3)
    assert count(g) == 729
    assert count(g, NodeMask(margin=2)) == 125
    logs = tuple(-(g.axis(i) ** 2) for i in range(3))
    assert count(g, NodeMask(log_amplitude=logs, log_floor=-0.1)) == 7


def test_report_pass_rule():
    r = ResidualReport("x", 0.1, 1.0, "-", "-", 1e-7, 1e-6, 1e-6)
    assert r.passed and r.row()[-1] == "true"
    assert not ResidualReport("x", 0.1, 1.0, "-", "-", 2e-6, 1e-6, 1e-6).passed
    assert not ResidualReport("x", 0.1, 1.0, "-", "-", math.nan, 1e-6, 1e-6).passed
