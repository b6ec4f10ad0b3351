import numpy as np
import pytest

import photonfilter as pf


TWO_LEVEL_OMEGA = 1.46
TWO_LEVEL_T0 = 4.0


def two_level_model():
    return pf.make_model(np.eye(2), pf.sigma_minus(), np.zeros((2, 2)))


def make_context(scheme="hd-hd", r=0.0, theta=0.0, omega=TWO_LEVEL_OMEGA,
                 t0=TWO_LEVEL_T0):
    return pf.FilterContext(system=two_level_model(),
                            wp=pf.WavePacket(omega=omega, t0=t0),
                            bs=pf.BeamSplitterParams(r=r, theta=theta),
                            scheme=scheme)


@pytest.fixture
def grid():
    return pf.TimeGrid(0.0, 10.0, 1e-3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, d=2, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_psd(rng, d=2, trace_one=False):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    p = a @ a.conj().T
    if trace_one:
        return p / np.trace(p).real
    return p * rng.uniform(0.2, 1.5)


def random_state(rng, d=2):
    """A structurally valid hierarchy: PSD diagonal slots, adjoint-paired
    off-diagonals, unit trace on the physical slot."""
    r01 = 0.4 * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return pf.HierarchyState(rho00=random_psd(rng, d),
                             rho01=r01,
                             rho10=r01.conj().T,
                             rho11=random_psd(rng, d, trace_one=True))


def draw_noise_block(seed, m, n, scheme):
    dw1 = np.empty((m, n))
    aux = np.empty((m, n))
    for i in range(m):
        dw1[i], aux[i] = pf.NoiseStream(seed, i).draw(n, scheme)
    return dw1, aux
