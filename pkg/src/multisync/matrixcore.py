"""Dense matrix kernel used by every other module.

Eigenvalues come from LAPACK through numpy (Hessenberg reduction followed by
Francis double-shift QR for general matrices, tridiagonal QL/QR for the
symmetric path). Everything here is a pure function of its inputs.

Tolerances follow one rule: an absolute tolerance ``tol`` is applied as
``tol * max(1, ||A||_F)`` so badly scaled inputs behave.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NotPositiveDefiniteError, ValidationError

__all__ = [
    "PsdVerdict",
    "as_matrix",
    "as_square",
    "scale_of",
    "sym",
    "eig",
    "eig_sym",
    "kron",
    "is_psd",
    "cholesky_factor",
    "basis_e_perp",
    "spectral_norm",
    "complete_laplacian",
    "unit_diag",
]

IMAG_SNAP = 1e-9
SYM_TOL = 1e-10


def as_matrix(A, name="matrix") -> np.ndarray:
    """Coerce to a finite 2-D float (or complex) array, raising on bad input."""
    arr = np.asarray(A)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.complexfloating):
        arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def as_square(A, name="matrix") -> np.ndarray:
    arr = as_matrix(A, name)
    if arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValidationError(f"{name} must have order >= 1")
    return arr


def scale_of(A) -> float:
    """``max(1, ||A||_F)``, the multiplier applied to absolute tolerances."""
    return max(1.0, float(np.linalg.norm(A)))


def sym(A) -> np.ndarray:
    """Hermitian part ``(A + A^H) / 2``."""
    A = np.asarray(A)
    return 0.5 * (A + A.conj().T)


def _sort_spectrum(values: np.ndarray) -> np.ndarray:
    order = np.lexsort((values.imag, values.real))
    return values[order]


def eig(A) -> np.ndarray:
    """Eigenvalues of a general square matrix, with multiplicity.

    Imaginary parts below ``1e-9 * max(1, ||A||_F)`` are snapped to zero, which
    keeps the forced zero eigenvalue of a Laplacian real. The result is sorted
    by real part, then imaginary part.
    """
    A = as_square(A)
    values = np.linalg.eigvals(A).astype(complex)
    dust = np.abs(values.imag) <= IMAG_SNAP * scale_of(A)
    values[dust] = values[dust].real
    return _sort_spectrum(values)


def eig_sym(A) -> np.ndarray:
    """Ascending real eigenvalues of a symmetric matrix."""
    A = as_square(A)
    if np.linalg.norm(A - A.T) > SYM_TOL * scale_of(A):
        raise ValidationError("eig_sym needs a symmetric matrix")
    return np.linalg.eigvalsh(sym(A))


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A, "A"), as_matrix(B, "B"))


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    min_sym_eigenvalue: float
    tolerance_used: float


def is_psd(A, tol=1e-9) -> PsdVerdict:
    """PSD test in the sense ``A + A^T >= 0`` (non-symmetric inputs allowed).

    ``tol`` is scaled by ``max(1, ||A||_F)``; the scaled value is reported.
    """
    A = as_square(A)
    lam = float(np.linalg.eigvalsh(sym(A))[0])
    used = tol * scale_of(A)
    return PsdVerdict(lam >= -used, lam, used)


def cholesky_factor(V) -> np.ndarray:
    """Upper-triangular ``C`` with ``V = C^T C``.

    Raises :class:`NotPositiveDefiniteError` carrying the index of the first
    non-positive pivot.
    """
    V = as_square(V, "V")
    if np.linalg.norm(V - V.T) > SYM_TOL * scale_of(V):
        raise ValidationError("cholesky_factor needs a symmetric matrix")
    n = V.shape[0]
    C = np.zeros_like(V)
    for j in range(n):
        pivot = V[j, j] - C[:j, j] @ C[:j, j]
        if pivot <= 0.0:
            raise NotPositiveDefiniteError(
                f"matrix is not positive definite (pivot {j} = {pivot:.3e})", pivot=j
            )
        C[j, j] = np.sqrt(pivot)
        C[j, j + 1:] = (V[j, j + 1:] - C[:j, j] @ C[:j, j + 1:]) / C[j, j]
    return C


@lru_cache(maxsize=64)
def _householder_basis(n: int) -> np.ndarray:
    u = np.full(n, 1.0 / np.sqrt(n))
    u[0] -= 1.0
    H = np.eye(n) - 2.0 * np.outer(u, u) / (u @ u)
    Q = H[:, 1:].copy()
    Q.setflags(write=False)
    return Q


def basis_e_perp(n: int) -> np.ndarray:
    """Orthonormal basis (n x (n-1)) of the complement of the all-ones vector.

    Built from the Householder reflector sending ``e/sqrt(n)`` to ``e_1``; the
    returned array is shared and read-only.
    """
    n = int(n)
    if n < 2:
        raise ValidationError("basis_e_perp needs n >= 2")
    return _householder_basis(n)


def spectral_norm(A) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(as_matrix(A), 2))


def complete_laplacian(n: int) -> np.ndarray:
    """``L_K = nI - J``, the Laplacian of the complete graph on n vertices."""
    return n * np.eye(n) - np.ones((n, n))


def unit_diag(i: int, m: int) -> np.ndarray:
    """``E_i``: m x m zero matrix with a single 1 at diagonal position i."""
    E = np.zeros((m, m))
    E[i, i] = 1.0
    return E
