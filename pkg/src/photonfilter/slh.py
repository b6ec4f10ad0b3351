"""Open-system triples (S, L, H) and their composition calculus.

A model with ``n`` field channels on a ``d``-dimensional system stores

* ``s``  -- the scattering matrix as one ``(n*d, n*d)`` array of d x d blocks,
* ``l``  -- the coupling operators as an ``(n, d, d)`` array,
* ``h``  -- the Hamiltonian, ``(d, d)``.

Scalar-entried models (beam splitters, vacuum channels) are just the d=1
case; composition lifts them to the partner's dimension, each scalar
becoming that multiple of the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError
from .operators import as_operator, dagger, is_hermitian, is_unitary, norm_inf


@dataclass(frozen=True)
class SlhModel:
    s: np.ndarray
    l: np.ndarray
    h: np.ndarray
    n_channels: int

    @property
    def dim(self):
        return self.h.shape[0]

    def s_block(self, i, j):
        """The (i, j) channel block of the scattering matrix."""
        d = self.dim
        return self.s[i * d:(i + 1) * d, j * d:(j + 1) * d]

    def l_stacked(self):
        """Couplings as an (n*d, d) column of blocks, for block products."""
        n, d = self.n_channels, self.dim
        return self.l.reshape(n * d, d)

    def validate(self, tol=1e-10):
        n, d = self.n_channels, self.dim
        if self.s.shape != (n * d, n * d):
            raise DimensionMismatchError(
                f"scattering matrix shape {self.s.shape} != {(n * d, n * d)}")
        if self.l.shape != (n, d, d):
            raise DimensionMismatchError(
                f"coupling array shape {self.l.shape} != {(n, d, d)}")
        if not is_unitary(self.s, tol):
            raise DimensionMismatchError("scattering matrix is not unitary")
        if not is_hermitian(self.h, tol):
            raise DimensionMismatchError("Hamiltonian is not Hermitian")
        return self


def make_model(s, l, h, dim=None):
    """Build an SlhModel from loosely-typed pieces.

    ``l`` may be a single operator or a sequence of them (one per channel);
    ``s`` may be None (identity), an (n, n) scalar matrix to lift, or the
    full (n*d, n*d) block matrix; ``h`` may be None for no Hamiltonian.
    """
    if isinstance(l, np.ndarray) and l.ndim == 2:
        l = [l]
    l = [as_operator(op) for op in l]
    n = len(l)
    if n == 0:
        raise DimensionMismatchError("a model needs at least one channel")
    d = dim if dim is not None else (l[0].shape[0] if h is None else np.asarray(h).shape[0])
    l_arr = np.stack([as_operator(op, d) for op in l])
    h_arr = np.zeros((d, d), dtype=complex) if h is None else as_operator(h, d)
    if s is None:
        s_arr = np.eye(n * d, dtype=complex)
    else:
        s_arr = np.asarray(s, dtype=complex)
        if s_arr.shape == (n * d, n * d):
            pass
        elif s_arr.shape == (n, n):
            s_arr = np.kron(s_arr, np.eye(d))
        else:
            raise DimensionMismatchError(
                f"scattering matrix shape {s_arr.shape} fits neither ({n},{n}) nor {(n * d, n * d)}")
    return SlhModel(s=s_arr, l=l_arr, h=h_arr, n_channels=n)


def vacuum_model(n_channels=1, dim=1):
    """n undisturbed field channels: identity scattering, no coupling."""
    zeros = [np.zeros((dim, dim), dtype=complex)] * n_channels
    return make_model(None, zeros, None, dim=dim)


def lift(g, dim):
    """Embed a scalar-entried (d=1) model on a dim-dimensional system."""
    if g.dim == dim:
        return g
    if g.dim != 1:
        raise DimensionMismatchError(
            f"cannot lift a dim-{g.dim} model to dim {dim}; only scalars lift")
    eye = np.eye(dim)
    s = np.kron(g.s, eye)
    l = np.stack([op[0, 0] * eye for op in g.l]).astype(complex)
    h = g.h[0, 0] * eye.astype(complex)
    return SlhModel(s=s, l=l, h=h, n_channels=g.n_channels)


def _common_dim(g1, g2):
    if g1.dim == g2.dim:
        return g1, g2
    if g1.dim == 1:
        return lift(g1, g2.dim), g2
    if g2.dim == 1:
        return g1, lift(g2, g1.dim)
    raise DimensionMismatchError(f"system dimensions differ: {g1.dim} vs {g2.dim}")


def concat(g1, g2):
    """Side-by-side composition: channels of g1 then channels of g2.

    Block-diagonal scattering, stacked couplings, summed Hamiltonians.
    """
    g1, g2 = _common_dim(g1, g2)
    n1, n2, d = g1.n_channels, g2.n_channels, g1.dim
    s = np.zeros(((n1 + n2) * d, (n1 + n2) * d), dtype=complex)
    s[:n1 * d, :n1 * d] = g1.s
    s[n1 * d:, n1 * d:] = g2.s
    return SlhModel(s=s, l=np.concatenate([g1.l, g2.l]), h=g1.h + g2.h,
                    n_channels=n1 + n2)


def im_op(a):
    """Operator imaginary part, (A - A†) / 2i. Always Hermitian."""
    return (a - dagger(a)) / 2j


def series(g2, g1):
    """Feed every output of g1 into the matching input of g2.

    Result: (S2 S1, L2 + S2 L1, H1 + H2 + Im{L2† S2 L1}).
    """
    g2, g1 = _common_dim(g2, g1)
    if g1.n_channels != g2.n_channels:
        raise DimensionMismatchError(
            f"channel counts differ: {g1.n_channels} vs {g2.n_channels}")
    n, d = g1.n_channels, g1.dim
    l1, l2 = g1.l_stacked(), g2.l_stacked()
    s2l1 = g2.s @ l1
    l = l2 + s2l1
    h = g1.h + g2.h + im_op(dagger(l2) @ s2l1)
    return SlhModel(s=g2.s @ g1.s, l=l.reshape(n, d, d), h=h, n_channels=n)


@dataclass(frozen=True)
class BeamSplitterParams:
    """Mixing of the monitored output with vacuum: reflectivity r, phase theta."""
    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"beam splitter reflectivity must lie in [0, 1], got {self.r}")

    @property
    def transmission(self):
        # sqrt(1 - r^2), the amplitude that stays in channel 1
        return math.sqrt(max(0.0, 1.0 - self.r * self.r))


def beam_splitter(p):
    """Two-channel static mixer: scattering only, no coupling, no Hamiltonian."""
    t = p.transmission * np.exp(1j * p.theta)
    c = p.r * np.exp(1j * (p.theta + np.pi / 2))
    s = np.array([[t, c], [c, t]], dtype=complex)
    return make_model(s, [np.zeros((1, 1))] * 2, None, dim=1)


def whole_system(g, lambda_t, p):
    """The monitored network at one instant of the source coupling.

    A two-level source (emitting the photon, coupling strength ``lambda_t``)
    cascades into the system; the output is mixed with a vacuum channel on
    the beam splitter. The joint space is source (x) system, source first.
    Built compositionally; used for consistency checks, not in the filter
    hot path.
    """
    if g.n_channels != 1:
        raise DimensionMismatchError("the cascaded system must be single-channel")
    d = g.dim
    eye2 = np.eye(2)
    sys_lift = SlhModel(s=np.kron(eye2, g.s), l=np.kron(eye2, g.l[0])[None, :, :],
                        h=np.kron(eye2, g.h), n_channels=1)
    sm = np.kron(np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex), np.eye(d))
    source = make_model(None, [lambda_t * sm], None, dim=2 * d)
    cascaded = series(sys_lift, source)
    return series(beam_splitter(p), concat(cascaded, vacuum_model(dim=2 * d)))
