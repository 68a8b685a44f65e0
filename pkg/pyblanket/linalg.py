"""Dense complex linear algebra over which the quantum objects are built.

Functions of Hermitian matrices all go through an eigendecomposition; the
matrices here never exceed 2**10 rows, so exactness wins over speed.
"""

from functools import reduce
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from .error import BlanketErrno, BlanketError

HERMITIAN_ATOL = 1e-10
UNITARY_ATOL = 1e-10


class HermitianEigen(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise BlanketError(
            BlanketErrno.NOT_SQUARE, f"expected a matrix, got shape {m.shape}",
        )
    return m


def require_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise BlanketError(
            BlanketErrno.NOT_SQUARE, f"matrix of shape {m.shape} is not square",
        )


def hermiticity_error(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - m.conj().T)))


def is_hermitian(m, atol: float = HERMITIAN_ATOL) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and hermiticity_error(m) <= atol


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def require_hermitian(m, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate ``m`` and return its symmetrized copy."""
    m = as_matrix(m)
    require_square(m)
    err = hermiticity_error(m)
    if err > atol:
        raise BlanketError(
            BlanketErrno.NOT_HERMITIAN,
            f"max |M - M^dagger| = {err:.3e} exceeds {atol:.0e}",
        )
    return hermitian_part(m)


def eigh(m) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    h = require_hermitian(m)
    w, v = scipy.linalg.eigh(h)
    return HermitianEigen(w, v)


def eigvalsh(m) -> np.ndarray:
    h = require_hermitian(m)
    return scipy.linalg.eigh(h, eigvals_only=True)


def expm_hermitian(h, scale: complex) -> np.ndarray:
    """Return ``exp(scale * h)`` for Hermitian ``h``.

    Unitary whenever ``scale`` is purely imaginary.
    """
    w, v = eigh(h)
    return (v * np.exp(scale * w)) @ v.conj().T


def funm_hermitian(h, func) -> np.ndarray:
    w, v = eigh(h)
    return (v * func(w)) @ v.conj().T


def kron(a, b, *rest) -> np.ndarray:
    return reduce(np.kron, rest, np.kron(as_matrix(a), as_matrix(b)))


def trace_norm(m) -> float:
    """Schatten 1-norm (sum of singular values)."""
    m = as_matrix(m)
    require_square(m)
    if hermiticity_error(m) <= HERMITIAN_ATOL:
        w = scipy.linalg.eigh(hermitian_part(m), eigvals_only=True)
        return float(np.sum(np.abs(w)))
    return float(np.sum(scipy.linalg.svdvals(m)))


def is_unitary(u, atol: float = UNITARY_ATOL) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    eye = np.eye(u.shape[0])
    return float(np.max(np.abs(u.conj().T @ u - eye), initial=0.0)) <= atol


def is_isometry(v, atol: float = UNITARY_ATOL) -> bool:
    v = as_matrix(v)
    eye = np.eye(v.shape[1])
    return float(np.max(np.abs(v.conj().T @ v - eye), initial=0.0)) <= atol


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitian_part(g)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    if dim == 1:
        return np.exp(2j * np.pi * rng.random()) * np.ones((1, 1))
    return np.asarray(unitary_group.rvs(dim, random_state=rng), dtype=complex)


def haar_isometry(d_out: int, d_in: int, rng: np.random.Generator) -> np.ndarray:
    if d_in > d_out:
        raise BlanketError(
            BlanketErrno.INVALID_ARGUMENT,
            f"no isometry from dimension {d_in} into {d_out}",
        )
    return haar_unitary(d_out, rng)[:, :d_in]


def haar_state_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def hermitian_from_parameters(theta: np.ndarray, dim: int) -> np.ndarray:
    """Hermitian matrix from ``dim**2`` real parameters.

    The first ``dim`` entries fill the diagonal, the rest fill the real and
    imaginary parts of the strict upper triangle.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (dim * dim,):
        raise BlanketError(
            BlanketErrno.INVALID_ARGUMENT,
            f"expected {dim * dim} parameters, got {theta.shape}",
        )
    h = np.diag(theta[:dim]).astype(complex)
    iu = np.triu_indices(dim, k=1)
    n_off = len(iu[0])
    upper = theta[dim:dim + n_off] + 1j * theta[dim + n_off:]
    h[iu] = upper
    h[iu[1], iu[0]] = upper.conj()
    return h


def unitary_from_parameters(theta: np.ndarray, dim: int) -> np.ndarray:
    """``U = exp(i H(theta))``; columns define a measured basis."""
    return expm_hermitian(hermitian_from_parameters(theta, dim), 1j)
