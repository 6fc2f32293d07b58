import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings
from hypothesis import strategies as st

from thermal_coset.fock import (
    DimensionCapError,
    ExponentialConvergenceError,
    MAX_DIM_ENV,
    DensityOperator,
    OperatorMatrix,
    PureState,
    SpaceMismatchError,
    apply_exponential,
    basis_state,
    check_dense,
    commutator,
    expectation,
    identity,
    inner,
    ladder,
    make_space,
    number_op,
    partial_trace_tilde,
)


@given(st.integers(1, 3), st.integers(1, 5), st.data())
def test_index_occupation_roundtrip(modes, cutoff, data):
    space = make_space(modes, cutoff)
    i = data.draw(st.integers(0, space.dim - 1))
    assert space.index(space.occupation(i)) == i


def test_lexicographic_order():
    space = make_space(2, 2)
    assert [tuple(space.occupation(i)) for i in range(4)] == [(0, 0), (0, 1), (0, 2), (1, 0)]


def test_dimension_cap(monkeypatch):
    with pytest.raises(DimensionCapError):
        make_space(4, 40, max_dim=1000)
    monkeypatch.setenv(MAX_DIM_ENV, "10")
    with pytest.raises(DimensionCapError):
        make_space(2, 5)
    with pytest.raises(DimensionCapError):
        check_dense(make_space(2, 3))


def test_ladder_action():
    space = make_space(2, 4)
    a = ladder(space, 0, "lower")
    ad = ladder(space, 0, "raise")
    out = a @ basis_state(space, (3, 1))
    assert out.amplitude((2, 1)) == pytest.approx(np.sqrt(3))
    out = ad @ basis_state(space, (1, 2))
    assert out.amplitude((2, 2)) == pytest.approx(np.sqrt(2))
    # hard truncation at the top level
    assert (ad @ basis_state(space, (4, 0))).norm() == 0.0
    np.testing.assert_allclose(ad.dense(), a.adjoint().dense())


def test_number_operator_matches_ladder_product():
    space = make_space(2, 5)
    a = ladder(space, 1, "lower")
    np.testing.assert_allclose((a.adjoint() @ a).dense(), number_op(space, 1).dense())


def test_commutator_identity_on_interior_only():
    space = make_space(1, 6)
    a = ladder(space, 0, "lower")
    c = commutator(a, a.adjoint()).dense()
    np.testing.assert_allclose(np.diag(c)[:-1], 1.0)
    # the top level sees -N instead of 1
    assert c[-1, -1] == pytest.approx(-6.0)


def test_bad_mode_and_space_mismatch():
    space = make_space(2, 3)
    with pytest.raises(ValueError):
        ladder(space, 2, "lower")
    with pytest.raises(SpaceMismatchError):
        inner(basis_state(space, (0, 0)), basis_state(make_space(2, 4), (0, 0)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 4.0))
def test_exponential_matches_scipy(seed, scale):
    rng = np.random.default_rng(seed)
    space = make_space(2, 4)
    h = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    gen = OperatorMatrix(space, scale * (h - h.conj().T) / np.abs(h).sum(axis=0).max())
    v = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
    ours = apply_exponential(gen, PureState(space, v)).amplitudes
    ref = spla.expm_multiply(gen.entries.tocsc(), v)
    np.testing.assert_allclose(ours, ref, atol=1e-12 * np.linalg.norm(v))


def test_exponential_convergence_error():
    space = make_space(1, 3)
    a = ladder(space, 0, "lower")
    with pytest.raises(ExponentialConvergenceError):
        apply_exponential((a.adjoint() - a) * 0.5, basis_state(space, (0,)), max_terms=1)


def test_partial_trace_of_product_state():
    space = make_space(2, 2)
    phys = np.array([0.6, 0.8j, 0.0])
    tilde = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
    psi = PureState(space, np.kron(phys, tilde))
    rho = partial_trace_tilde(psi)
    np.testing.assert_allclose(rho.matrix, np.outer(phys, phys.conj()), atol=1e-15)
    rho.check(tol_trace=1e-12)


def test_partial_trace_of_entangled_state_is_mixed():
    space = make_space(2, 1)
    psi = PureState(space, np.array([1, 0, 0, 1]) / np.sqrt(2))
    rho = partial_trace_tilde(psi)
    np.testing.assert_allclose(rho.matrix, np.eye(2) / 2)


def test_density_checks_raise():
    space = make_space(1, 1)
    with pytest.raises(ValueError, match="Hermitian"):
        DensityOperator(space, np.array([[0.5, 0.1], [0.0, 0.5]])).check(1e-12)
    with pytest.raises(ValueError, match="trace"):
        DensityOperator(space, np.eye(2)).check(1e-12)
    with pytest.raises(ValueError, match="semidefinite"):
        DensityOperator(space, np.diag([1.5, -0.5])).check(1e-12)


def test_expectation():
    space = make_space(1, 3)
    rho = DensityOperator(space, np.diag([0.5, 0.25, 0.25, 0.0]))
    assert expectation(rho, number_op(space, 0)) == pytest.approx(0.75)
    assert expectation(rho, identity(space)) == pytest.approx(1.0)
