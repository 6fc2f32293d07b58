import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermal_coset import states
from thermal_coset.fock import partial_trace_tilde
from thermal_coset.liealg import Su11Params, Su2Params, TailError, coherent_su2_pure
from thermal_coset.tfd import thermal_coherent_su11_oracle, thermal_coherent_su2_oracle, thermal_context

HOT = thermal_context(2.0)


@pytest.fixture(scope="module")
def su2_pair():
    p = Su2Params.from_j(1.0, 0.4 - 0.3j)
    oracle = partial_trace_tilde(thermal_coherent_su2_oracle(p, HOT, 12, pad=8))
    return p, oracle


def test_su2_matches_oracle(su2_pair):
    p, oracle = su2_pair
    rho = states.rho_su2(p.j, p.z, HOT, 12, tol_tail=None)
    np.testing.assert_allclose(rho.matrix, oracle.matrix, atol=1e-9)


def test_su2_single_coefficient_matches_oracle(su2_pair):
    p, oracle = su2_pair
    # |3, 2><4, 1| collects every (m, m', n1, n2) with n1 + j + m = 3, n2 + j - m = 2, m' = m + 1
    total = 0
    for jm in range(p.twice_j):
        n1, n2 = 3 - jm, 2 - (p.twice_j - jm)
        if n1 >= 0 and n2 >= 0:
            total += states.c_coeff_su2(p.j, p.z, HOT, jm - p.j, jm + 1 - p.j, n1, n2)
    assert total == pytest.approx(oracle.element((3, 2), (4, 1)), abs=1e-10)


def test_su11_matches_oracle():
    p = Su11Params(2, 0.25j)
    oracle = partial_trace_tilde(thermal_coherent_su11_oracle(p, HOT, 14, pad=8))
    rho = states.rho_su11(p.q, p.zeta, HOT, 14, tol_tail=None)
    np.testing.assert_allclose(rho.matrix, oracle.matrix, atol=1e-9)
    g = states.gamma_coeff_su11(p.q, p.zeta, HOT, 1, 0, 0, 3)
    assert g == pytest.approx(oracle.element((3, 4), (2, 3)), abs=1e-10)


def test_tamper_hook_is_visible(su2_pair):
    p, oracle = su2_pair

    def hook(values, _idx):
        values = values.copy()
        values[0] += 1e-6
        return values

    rho = states.rho_su2(p.j, p.z, HOT, 12, tol_tail=None, coeff_hook=hook)
    assert np.max(np.abs(rho.matrix - oracle.matrix)) > 5e-7


@settings(max_examples=15, deadline=None)
@given(
    st.sampled_from([0.5, 1.0, 1.5]),
    st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False),
    st.floats(1.0, 5.0),
)
def test_su2_invariants(j, z, x):
    ctx = thermal_context(x)
    cutoff = states.auto_cutoff_su2(j, z, ctx, 1e-6)
    rho = states.rho_su2(j, z, ctx, cutoff, tol_tail=1e-6)
    assert abs(rho.trace() - 1) <= rho.tail_bound + 1e-12
    rho.check(tol_trace=rho.tail_bound + 1e-12)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2), st.complex_numbers(max_magnitude=0.4, allow_nan=False), st.floats(1.0, 5.0))
def test_su11_trace_matches_tail(q, zeta, x):
    ctx = thermal_context(x)
    cutoff = states.auto_cutoff_su11(q, zeta, ctx, 1e-6)
    rho = states.rho_su11(q, zeta, ctx, cutoff, tol_tail=1e-6)
    tr = rho.trace().real
    assert 1 - tr == pytest.approx(rho.tail_bound, abs=1e-12)
    assert states.trace_su11(q, zeta, ctx, cutoff) == pytest.approx(tr, abs=1e-12)
    rho.check(tol_trace=rho.tail_bound + 1e-12)


def test_tail_error_suggestion_is_sufficient():
    ctx = thermal_context(0.5)
    with pytest.raises(TailError) as info:
        states.rho_su2(0.5, 0.1, ctx, 5)
    suggested = info.value.suggested_cutoff
    assert states.su2_rho_tail(0.5, 0.1, ctx, suggested) <= 1e-8


def test_zero_temperature_limit():
    ctx = thermal_context(40.0)
    rho = states.rho_su2(1.5, 0.2j, ctx, 3)
    pure = coherent_su2_pure(Su2Params.from_j(1.5, 0.2j), rho.space).amplitudes
    np.testing.assert_allclose(rho.matrix, np.outer(pure, pure.conj()), atol=1e-8)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        states.rho_su2(0.5, 0.1, thermal_context(0.0), 5)
    with pytest.raises(ValueError):
        states.rho_su11(0, 1.2, HOT, 5)
    with pytest.raises(ValueError):
        states.c_coeff_su2(1, 0.1, HOT, 2, 0, 0, 0)


def test_overlaps_are_unit_on_diagonal():
    assert states.overlap_su2(0.7j, 0.7j, 2.5) == pytest.approx(1.0)
    assert states.overlap_su11(0.5, 0.5, 3) == pytest.approx(1.0)
    assert abs(states.overlap_su2(0.1, 5.0, 1)) < 1


@pytest.mark.parametrize("j", [0.5, 2.0])
def test_identity_resolution(j):
    assert states.identity_resolution_su2(j, 24, 24) < 1e-12


def test_identity_resolution_survives_bogoliubov():
    assert states.identity_resolution_su2_thermal(0.5, HOT, 10, 16, 16) < 1e-12
