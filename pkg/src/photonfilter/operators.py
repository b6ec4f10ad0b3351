"""Dense complex operator algebra and the superoperators the filters are built from.

Operators are plain ``numpy.ndarray`` values of shape ``(d, d)`` and dtype
complex128. System dimensions here are tiny (2..8), so everything is dense
and double precision; no sparsity or truncation management.

Tolerance checks throughout the package use the max-abs-entry norm.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError


def as_operator(a, dim=None):
    """Coerce ``a`` to a square complex matrix, validating its shape.

    Parameters
    ----------
    a : array_like
        Square matrix data.
    dim : int, optional
        Required dimension; mismatch raises ``DimensionMismatchError``.
    """
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {m.shape[0]}")
    return m


def dagger(a):
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def norm_inf(a):
    """Max absolute entry; the norm used for every tolerance check."""
    a = np.asarray(a)
    return 0.0 if a.size == 0 else float(np.max(np.abs(a)))


def is_hermitian(a, tol=1e-10):
    a = as_operator(a)
    return norm_inf(a - dagger(a)) <= tol


def is_unitary(a, tol=1e-10):
    a = as_operator(a)
    eye = np.eye(a.shape[0])
    return norm_inf(dagger(a) @ a - eye) <= tol and norm_inf(a @ dagger(a) - eye) <= tol


def _check_same_dim(*ops):
    dims = {op.shape[0] for op in ops}
    if len(dims) != 1:
        raise DimensionMismatchError(f"operator dimensions differ: {sorted(dims)}")


def commutator(a, b):
    """[A, B] = AB - BA."""
    a, b = as_operator(a), as_operator(b)
    _check_same_dim(a, b)
    return a @ b - b @ a


def dissipator(a, b):
    """Adjoint-side dissipator: A† B A - (A†A B + B A†A)/2."""
    a, b = as_operator(a), as_operator(b)
    _check_same_dim(a, b)
    ad = dagger(a)
    ada = ad @ a
    return ad @ b @ a - 0.5 * (ada @ b + b @ ada)


def dissipator_star(a, rho):
    """State-side dissipator: A rho A† - (A†A rho + rho A†A)/2. Trace free."""
    a, rho = as_operator(a), as_operator(rho)
    _check_same_dim(a, rho)
    ad = dagger(a)
    ada = ad @ a
    return a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada)


def lindbladian(g, x):
    """Heisenberg-picture generator -i[X, H] + sum_i D_{L_i} X.

    ``g`` is any object with a Hamiltonian ``h`` and coupling list ``l``
    (an SlhModel works).
    """
    x = as_operator(x)
    out = -1j * commutator(x, g.h)
    for li in g.l:
        out = out + dissipator(li, x)
    return out


def liouvillian(g, rho):
    """State-picture generator -i[H, rho] + sum_i D*_{L_i} rho.

    Defined as the trace-pairing adjoint of ``lindbladian``:
    Tr[rho L(X)] == Tr[X L*(rho)] for all X.
    """
    rho = as_operator(rho)
    out = -1j * commutator(g.h, rho)
    for li in g.l:
        out = out + dissipator_star(li, rho)
    return out


def sigma_minus():
    """Two-level lowering operator in the basis {|e>=index 0, |g>=index 1}."""
    return np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)


def sigma_plus():
    return dagger(sigma_minus())


def basis_state(dim, index):
    """Column vector |index> on a dim-dimensional space."""
    if not 0 <= index < dim:
        raise DimensionMismatchError(f"basis index {index} outside dimension {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec):
    """|v><v| for a (not necessarily normalized) column vector."""
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())
