import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermal_coset.fock import apply_exponential, basis_state, make_space
from thermal_coset.liealg import (
    HwParams,
    Su11Params,
    Su2Params,
    TailError,
    casimir_su11,
    casimir_su2,
    coherent_hw_pure,
    coherent_su11_pure,
    coherent_su2_pure,
    displacement_map_su11,
    displacement_map_su2,
    su11_amplitudes,
    su11_generators,
    su11_tail,
    su2_amplitudes,
    su2_generators,
)

small = st.complex_numbers(max_magnitude=1.4, allow_nan=False, allow_infinity=False)


@given(small)
def test_maps_agree_below_quarter_turn(eta):
    assert displacement_map_su2(eta, "tangent") == pytest.approx(displacement_map_su2(eta, "sine"), abs=1e-9, rel=1e-9)


def test_maps_differ_beyond_quarter_turn():
    assert abs(displacement_map_su2(2.0, "tangent") - displacement_map_su2(2.0, "sine")) > 1.0
    with pytest.raises(ValueError, match="pole"):
        displacement_map_su2(math.pi / 2, "tangent")


def test_su11_map():
    assert displacement_map_su11(0) == 0
    assert displacement_map_su11(1j) == pytest.approx(1j * math.tanh(1.0))


@pytest.mark.parametrize("j", [0.5, 1.0, 2.5])
def test_su2_casimir_on_dicke_block(j):
    twice = int(2 * j)
    space = make_space(2, twice + 1)
    cas = casimir_su2(space)
    for a in range(twice + 1):
        psi = basis_state(space, (a, twice - a))
        out = (cas @ psi).amplitudes
        np.testing.assert_allclose(out, j * (j + 1) * psi.amplitudes, atol=1e-12)


@pytest.mark.parametrize("q", [0, 1, 3])
def test_su11_casimir_interior(q):
    k = (1 + q) / 2
    space = make_space(2, q + 6)
    cas = casimir_su11(space)
    for n in range(4):
        psi = basis_state(space, (n + q, n))
        np.testing.assert_allclose((cas @ psi).amplitudes, k * (k - 1) * psi.amplitudes, atol=1e-12)


@given(st.integers(1, 12), small)
def test_su2_amplitudes_normalized(twice_j, z):
    assert np.linalg.norm(su2_amplitudes(twice_j, z)) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 4), st.complex_numbers(max_magnitude=0.7, allow_nan=False))
def test_su11_amplitudes_plus_tail(q, zeta):
    n_max = 60
    mass = np.sum(np.abs(su11_amplitudes(q, zeta, n_max)) ** 2)
    assert mass + su11_tail(q, zeta, n_max) == pytest.approx(1.0, abs=1e-12)


def test_su2_tangent_map_matches_exponentiation():
    j, eta = 1.5, 0.7 * cmath.exp(0.4j)
    p = Su2Params.from_eta(j, eta)
    space = make_space(2, p.twice_j)
    g = su2_generators(space)
    exact = apply_exponential(g.plus * eta - g.minus * eta.conjugate(), basis_state(space, (0, p.twice_j)))
    np.testing.assert_allclose(coherent_su2_pure(p, space).amplitudes, exact.amplitudes, atol=1e-13)


def test_su11_map_matches_exponentiation():
    q, alpha = 1, 0.3 - 0.2j
    p = Su11Params.from_alpha(q, alpha)
    space = make_space(2, 70)
    g = su11_generators(space)
    exact = apply_exponential(g.plus * alpha - g.minus * alpha.conjugate(), basis_state(space, (q, 0)))
    closed = coherent_su11_pure(p, space).amplitudes
    # compare away from the truncation edge
    idx = [space.index((n + q, n)) for n in range(30)]
    np.testing.assert_allclose(closed[idx], exact.amplitudes[idx], atol=1e-12)


def test_param_validation():
    with pytest.raises(ValueError, match=r"\|zeta\| < 1"):
        Su11Params(0, 1.0)
    with pytest.raises(ValueError):
        Su11Params(-1, 0.1)
    with pytest.raises(ValueError, match="half-integer"):
        Su2Params.from_j(0.3, 0.1)
    with pytest.raises(ValueError):
        Su11Params(0, 0.5, alpha=0.1)


def test_truncation_errors_suggest_cutoff():
    with pytest.raises(TailError) as info:
        coherent_su11_pure(Su11Params(0, 0.9), make_space(2, 10))
    suggested = info.value.suggested_cutoff
    assert su11_tail(0, 0.9, suggested) < 1e-12
    with pytest.raises(TailError):
        coherent_hw_pure(HwParams(3.0), make_space(1, 5))


def test_hw_state_matches_poisson_weights():
    space = make_space(1, 40)
    probs = np.abs(coherent_hw_pure(HwParams(1.5j), space).amplitudes) ** 2
    n = np.arange(41)
    expected = np.exp(-2.25) * 2.25**n / np.array([math.factorial(k) for k in n], dtype=float)
    np.testing.assert_allclose(probs, expected, atol=1e-15)
