import numpy as np
import numpy.testing as npt
import pytest

import photonfilter as pf
from photonfilter.operators import (as_operator, dagger, is_hermitian,
                                    is_unitary, norm_inf)

from conftest import random_hermitian, random_psd, two_level_model


def test_as_operator_validates_shape():
    with pytest.raises(pf.DimensionMismatchError):
        as_operator(np.zeros((2, 3)))
    with pytest.raises(pf.DimensionMismatchError):
        as_operator(np.eye(3), dim=2)


def test_dagger_is_conjugate_transpose(rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    npt.assert_array_equal(dagger(a), a.conj().T)


def test_hermitian_and_unitary_predicates():
    assert is_hermitian(np.diag([1.0, -2.0]))
    assert not is_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    assert is_unitary(np.eye(2))
    th = 0.3
    u = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    assert is_unitary(u)
    assert not is_unitary(2 * np.eye(2))


def test_basis_and_ladder_convention():
    e, g = pf.basis_state(2, 0), pf.basis_state(2, 1)
    sm = pf.sigma_minus()
    npt.assert_allclose(sm @ e, g)
    npt.assert_allclose(sm @ g, np.zeros(2))
    npt.assert_allclose(pf.sigma_plus(), sm.conj().T)
    npt.assert_allclose(pf.projector(e), np.diag([1.0, 0.0]))


def test_commutator():
    sz = np.diag([1.0, -1.0]).astype(complex)
    npt.assert_allclose(pf.commutator(pf.sigma_plus(), pf.sigma_minus()), sz)


def test_dissipator_zero_on_commuting_invariant_state():
    # sigma_minus dissipator kills the ground-state projector
    g = pf.projector(pf.basis_state(2, 1))
    npt.assert_allclose(pf.dissipator_star(pf.sigma_minus(), g),
                        np.zeros((2, 2)), atol=1e-14)


def test_liouvillian_reproduces_exponential_decay():
    g = two_level_model()
    ee = pf.projector(pf.basis_state(2, 0))
    rhs = pf.liouvillian(g, ee)
    # population leaves the excited state at unit rate
    npt.assert_allclose(rhs, np.diag([-1.0, 1.0]), atol=1e-14)


def test_superoperator_duality_random_draws(rng):
    # trace pairing: Tr[rho * L(X)] == Tr[X * Lstar(rho)]
    for _ in range(100):
        h = random_hermitian(rng)
        l = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        g = pf.make_model(np.eye(2), l, h)
        rho = random_psd(rng)
        x = random_hermitian(rng)
        lhs = np.trace(rho @ pf.lindbladian(g, x))
        rhs = np.trace(x @ pf.liouvillian(g, rho))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_norm_inf_is_max_abs_entry():
    a = np.array([[1.0, -3.5], [2.0, 0.5]])
    assert norm_inf(a) == 3.5
