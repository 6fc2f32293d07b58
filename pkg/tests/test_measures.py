import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite import hermgauss
from scipy.special import eval_genlaguerre, eval_hermite

from thermal_coset import measures
from thermal_coset.fock import DensityOperator, make_space
from thermal_coset.measures import WignerPoint
from thermal_coset.states import rho_su11, rho_su2
from thermal_coset.tfd import thermal_context


def exact_laguerre(n, alpha, t):
    t = Fraction(t)
    return sum(Fraction((-1) ** k * math.comb(n + alpha, n - k)) * t**k / math.factorial(k) for k in range(n + 1))


# --- Laguerre ----------------------------------------------------------------


def test_laguerre_small_values():
    assert measures.laguerre_assoc(2, 0, 1.0) == pytest.approx(-0.5, abs=1e-15)
    assert measures.laguerre_assoc(0, 4, 3.0) == 1.0
    assert measures.laguerre_assoc(5, 3, 2.0) == pytest.approx(float(exact_laguerre(5, 3, 2)), rel=1e-14)


@given(st.integers(0, 40), st.integers(0, 8), st.floats(0, 30))
def test_laguerre_vs_scipy(n, alpha, t):
    ours = measures.laguerre_assoc(n, alpha, t)
    ref = eval_genlaguerre(n, alpha, t)
    scale = max(1.0, np.max(np.abs(eval_genlaguerre(np.arange(n + 1), alpha, t))))
    assert abs(ours - ref) <= 1e-12 * scale


def test_laguerre_log_scale_survives_large_argument():
    n, alpha, y = 60, 2, 1000
    table = measures.laguerre_table(n, alpha, np.array([float(y)]), log_scale=-y / 2)
    exact = exact_laguerre(n, alpha, y)
    log_exact = math.log(abs(exact.numerator)) - math.log(exact.denominator) - y / 2
    assert np.isfinite(table).all()
    assert math.log(abs(table[n, 0])) == pytest.approx(log_exact, abs=1e-12 * abs(log_exact))


def test_laguerre_range():
    with pytest.raises(ValueError):
        measures.laguerre_assoc(10**4 + 1, 0, 1.0)


# --- fidelity ----------------------------------------------------------------


def test_su2_fidelity_anchor():
    ctx = thermal_context(math.log(2))
    assert measures.fidelity_su2_closed(1, ctx) == pytest.approx(0.25, rel=1e-14)
    assert measures.fidelity_su2_numeric(1, 0.6 - 0.2j, ctx) == pytest.approx(0.25, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([0.5, 1.0, 2.5]), st.complex_numbers(max_magnitude=5, allow_nan=False), st.floats(0.01, 8))
def test_su2_fidelity_independent_of_z(j, z, x):
    ctx = thermal_context(x)
    assert measures.fidelity_su2_numeric(j, z, ctx) == pytest.approx(measures.fidelity_su2_closed(j, ctx), abs=1e-12)


def test_su2_fidelity_monotone_in_x():
    fs = [measures.fidelity_su2_closed(1.5, thermal_context(x)) for x in np.geomspace(0.01, 20, 40)]
    assert all(b > a for a, b in zip(fs, fs[1:]))
    assert fs[-1] < 1


@pytest.mark.parametrize("q, zeta, x", [(0, 0.2, 1.0), (1, 0.3 + 0.3j, 0.4), (2, 0.0, 2.0)])
def test_su11_series_vs_numeric(q, zeta, x):
    ctx = thermal_context(x)
    res = measures.fidelity_su11_triple_sum(q, zeta, ctx)
    cutoff = 40
    num = measures.fidelity_su11_numeric(q, zeta, ctx, cutoff)
    bound = res.remainder_bound / (2 * math.sqrt(res.value)) + measures.fidelity_su11_numeric_bound(q, zeta, cutoff)
    assert math.sqrt(res.value) == pytest.approx(num, abs=max(bound, 1e-13))
    assert res.remainder_bound <= 1e-14 * res.value
    assert measures.fidelity_su11_series(q, zeta, ctx) == pytest.approx(math.sqrt(res.value))


# --- Wigner ------------------------------------------------------------------


def _psi_times_gauss(n, u):
    return eval_hermite(n, u) / math.sqrt(2.0**n * math.factorial(n) * math.sqrt(math.pi))


def _position_space_wigner(a, b, q, p, nodes=160):
    """(1/pi) int psi_a(q+y) psi_b(q-y) exp(-2ipy) dy by Gauss-Hermite quadrature."""
    y, w = hermgauss(nodes)
    f = _psi_times_gauss(a, q + y) * _psi_times_gauss(b, q - y) * np.exp(-2j * p * y)
    return math.exp(-q * q) * np.sum(w * f) / math.pi


@pytest.mark.parametrize("q, p", [(0.3, -0.7), (1.1, 0.4), (-0.5, 1.5)])
def test_fock_kernel_vs_position_space(q, p):
    levels = 6
    kernel = measures.fock_wigner_kernel(levels, complex(q, p))
    ref = np.array([[_position_space_wigner(a, b, q, p) for b in range(levels)] for a in range(levels)])
    # raw convention: 2 pi times the usual single-mode W
    np.testing.assert_allclose(kernel, 2 * math.pi * ref, atol=1e-13)


def test_kernel_phase_space_normalization():
    g = np.linspace(-8, 8, 401)
    q, p = np.meshgrid(g, g, indexing="ij")
    cell = (g[1] - g[0]) ** 2
    x = (q + 1j * p).ravel()
    kernels = np.array([measures.fock_wigner_kernel(4, xi) for xi in x])
    integral = kernels.sum(axis=0) * cell / (2 * math.pi)
    np.testing.assert_allclose(integral, np.eye(4), atol=1e-10)


def test_vacuum_anchor_and_fock_negativity():
    space = make_space(2, 2)
    vac = DensityOperator(space, np.diag([1.0] + [0.0] * 8))
    assert measures.wigner_numeric(vac, WignerPoint(0, 0, 0, 0)) == pytest.approx(4.0)
    assert 4.0 * measures.RAW_TO_NORMALIZED == pytest.approx(1 / math.pi**2)
    one = np.zeros(9)
    one[space.index((1, 0))] = 1
    assert measures.wigner_numeric(DensityOperator(space, np.diag(one)), WignerPoint(0, 0, 0, 0)) == pytest.approx(-4.0)


@pytest.fixture(scope="module")
def su2_case():
    ctx = thermal_context(1.2)
    j, z = 1.0, 0.3 + 0.4j
    return ctx, j, z, rho_su2(j, z, ctx, 34, tol_tail=None)


@pytest.fixture(scope="module")
def su11_case():
    ctx = thermal_context(1.2)
    q, zeta = 1, 0.3 + 0.2j
    return ctx, q, zeta, rho_su11(q, zeta, ctx, 36, tol_tail=None)


points = st.tuples(*[st.floats(-1.5, 1.5)] * 4)


@settings(max_examples=12, deadline=None)
@given(points)
def test_su2_wigner_closed_vs_numeric(su2_case, pt):
    ctx, j, z, rho = su2_case
    point = WignerPoint(*pt)
    ref = measures.wigner_numeric(rho, point)
    val = measures.wigner_su2_closed(point, j, z, ctx, tol_tail=1e-13)
    assert val == pytest.approx(ref, rel=1e-7, abs=1e-11)


@settings(max_examples=12, deadline=None)
@given(points)
def test_su11_wigner_closed_vs_numeric(su11_case, pt):
    ctx, q, zeta, rho = su11_case
    point = WignerPoint(*pt)
    ref = measures.wigner_numeric(rho, point)
    val = measures.wigner_su11_closed(point, q, zeta, ctx, tol_tail=1e-13)
    assert val == pytest.approx(ref, rel=1e-7, abs=1e-11)


def test_literal_chi_disagrees_for_complex_z(su2_case):
    ctx, j, z, rho = su2_case
    point = WignerPoint(0.4, -0.9, 0.7, 0.2)
    ref = measures.wigner_numeric(rho, point)
    try:
        literal = measures.wigner_su2_closed(point, j, z, ctx, chi="literal")
    except ArithmeticError:
        return
    assert abs(literal - ref) > 1e-3 * abs(ref)


@settings(max_examples=10, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False), min_size=2, max_size=2))
def test_series_within_tail_of_resummed(xs):
    ctx = thermal_context(0.3)
    x1, x2 = xs
    series = measures.wigner_su2_values(x1, x2, 1.5, 0.2 - 0.1j, ctx, tol_tail=1e-9)
    resummed = measures.wigner_su2_values(x1, x2, 1.5, 0.2 - 0.1j, ctx, method="resummed")
    assert abs(series.raw - resummed.raw) <= series.tail_bound + 1e-12
    s11 = measures.wigner_su11_values(x1, x2, 2, 0.3j, ctx, tol_tail=1e-9)
    r11 = measures.wigner_su11_values(x1, x2, 2, 0.3j, ctx, tol_tail=1e-9, method="resummed")
    assert abs(s11.raw - r11.raw) <= s11.tail_bound + r11.tail_bound + 1e-12


def test_real_z_gives_momentum_reflection_symmetry():
    ctx = thermal_context(1.0)
    a = measures.wigner_su2_closed(WignerPoint(0.3, 0.8, -0.4, 0.5), 1.5, 0.4, ctx)
    b = measures.wigner_su2_closed(WignerPoint(0.3, -0.8, -0.4, -0.5), 1.5, 0.4, ctx)
    assert a == pytest.approx(b, rel=1e-12)


def test_truncation_below_tolerance_has_honest_tail():
    ctx = thermal_context(0.1)
    val = measures.wigner_su2_values(0.2, 0.1, 1.0, 0.1, ctx, n_terms=5)
    ref = measures.wigner_su2_values(0.2, 0.1, 1.0, 0.1, ctx, method="resummed")
    assert abs(val.raw - ref.raw) <= val.tail_bound
    assert val.tail_bound > 1e-3


def test_grid_shape_and_validation():
    ctx = thermal_context(1.0)
    grid = measures.wigner_grid("su2", {"j": 0.5, "z": 0.1}, ctx, axis1=(-1, 1, 5), axis2=(-2, 2, 7))
    assert grid.values.shape == (5, 7)
    c1, c2 = grid.coords()
    assert c1[0] == -1 and c2[-1] == 2
    with pytest.raises(ValueError):
        measures.wigner_grid("su2", {"j": 0.5, "z": 0.1}, ctx, plane=("q1", "q1"))
    with pytest.raises(ValueError):
        measures.wigner_grid("hw", {}, ctx)
