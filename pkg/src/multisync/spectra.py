"""Commuting matrix families and the spectra of ``sum_i A_i (x) B_i``.

A commuting family is brought to a common upper-triangular form by a unitary
``Z`` taken from the complex Schur form of a random combination
``S = sum_i c_i A_i``. When S has distinct eigenvalues, its Schur flags are
invariant under every member, so ``Z^H A_i Z`` is triangular and its diagonal
is the aligned eigenvalue row ``lambda_i.``. The strictly lower residual is
checked, and a fresh combination is drawn on failure.

For families with zero row sums the all-ones direction is deflated first, so
joint index 0 is always the consensus index with eigenvector ``e``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import HypothesisError, MultisyncError, NotCommutingError, ValidationError
from .graphs import from_laplacian, graph_sum, has_spanning_directed_tree, reversal
from .matrixcore import as_square, basis_e_perp, eig, scale_of

__all__ = [
    "CommutingFamily",
    "JointZeroIndex",
    "make_family",
    "polynomial_family",
    "kron_sum_spectrum",
    "kron_sum",
    "zero_multiplicity",
    "joint_zero_index",
    "commutation_residual",
]

COMMUTE_TOL = 1e-8
TRIANGULAR_TOL = 1e-6
CLUSTER_GAP = 1e-6
ZERO_TOL = 1e-7
MAX_ALIGN_ATTEMPTS = 5


@dataclass(frozen=True, eq=False)
class CommutingFamily:
    """Commuting matrices with their aligned eigenvalues.

    ``joint_table[i, j]`` is the eigenvalue of member ``i`` at joint position
    ``j``. ``alignment_vectors`` (columns) is set only when the family is
    unitarily diagonalized by the alignment, i.e. for normal members.
    """

    members: tuple
    joint_table: np.ndarray
    alignment_vectors: np.ndarray | None
    commutation_residual: float
    zero_row_sums: bool = False

    @property
    def n(self) -> int:
        return self.members[0].shape[0]

    @property
    def r(self) -> int:
        return len(self.members)

    def is_normal(self, tol=1e-9) -> bool:
        return all(
            np.linalg.norm(A @ A.T - A.T @ A) <= tol * scale_of(A) ** 2 for A in self.members
        )


@dataclass(frozen=True)
class JointZeroIndex:
    index: int
    eigenvector: np.ndarray


def commutation_residual(ms) -> tuple:
    """Largest relative commutator norm over pairs, and the worst pair."""
    worst, pair = 0.0, None
    for (i, A), (j, B) in combinations(enumerate(ms), 2):
        denom = max(1.0, np.linalg.norm(A) * np.linalg.norm(B))
        res = np.linalg.norm(A @ B - B @ A) / denom
        if res > worst or pair is None:
            worst, pair = res, (i, j)
    return worst, pair


def _validate_members(ms):
    ms = [as_square(A, f"member {k}") for k, A in enumerate(ms)]
    if not ms:
        raise ValidationError("a family needs at least one member")
    n = ms[0].shape[0]
    if any(A.shape[0] != n for A in ms):
        raise ValidationError("family members must share their order")
    return ms


def _has_zero_row_sums(ms) -> bool:
    return all(np.abs(A.sum(axis=1)).max() <= 1e-10 * scale_of(A) for A in ms)


def _lower_residual(T: np.ndarray) -> float:
    return float(np.linalg.norm(np.tril(T, -1)))


def _triangularize(ms, rng):
    """Common unitary triangularization of commuting ``ms``.

    Returns ``(Z, table)`` where ``table[i] = diag(Z^H ms[i] Z)``.
    """
    r = len(ms)
    best = None
    for _ in range(MAX_ALIGN_ATTEMPTS):
        c = rng.standard_normal(r)
        S = sum(ci * A for ci, A in zip(c, ms))
        T, Z = scipy.linalg.schur(S.astype(complex), output="complex")
        forms = [Z.conj().T @ A @ Z for A in ms]
        ok = all(_lower_residual(F) <= TRIANGULAR_TOL * scale_of(A) for F, A in zip(forms, ms))
        d = np.diag(T)
        gaps = np.abs(d[:, None] - d[None, :])[np.triu_indices(len(d), 1)]
        clustered = gaps.size > 0 and gaps.min() < CLUSTER_GAP * scale_of(S)
        if ok and not clustered:
            return Z, np.array([np.diag(F) for F in forms])
        if ok and best is None:
            best = (Z, np.array([np.diag(F) for F in forms]))
    if best is not None:
        # every draw clustered: the members coincide on a shared eigenspace
        return best
    raise MultisyncError(
        f"could not align the family after {MAX_ALIGN_ATTEMPTS} random combinations"
    )


def _diagonal_in(B: np.ndarray, ms) -> bool:
    for A in ms:
        F = B.conj().T @ A @ B
        if np.linalg.norm(F - np.diag(np.diag(F))) > TRIANGULAR_TOL * scale_of(A):
            return False
    return True


def make_family(ms, seed=0) -> CommutingFamily:
    """Verify that ``ms`` commute and align their eigenvalues.

    Raises :class:`NotCommutingError` naming the worst pair when some
    commutator exceeds ``1e-8 * ||A_i|| ||A_j||``.
    """
    ms = _validate_members(ms)
    residual, pair = commutation_residual(ms)
    if residual > COMMUTE_TOL:
        raise NotCommutingError(
            f"members {pair} do not commute (relative residual {residual:.3e})",
            pair=pair,
            residual=residual,
        )
    rng = np.random.default_rng(seed)
    n = ms[0].shape[0]
    zero_rows = n >= 2 and _has_zero_row_sums(ms)
    if zero_rows:
        Q = basis_e_perp(n)
        Z, table = _triangularize([Q.T @ A @ Q for A in ms], rng)
        table = np.hstack([np.zeros((len(ms), 1), complex), table])
        basis = np.hstack([np.full((n, 1), 1.0 / np.sqrt(n)), Q @ Z])
    else:
        Z, table = _triangularize(ms, rng)
        basis = Z
    vectors = basis if _diagonal_in(basis, ms) else None
    return CommutingFamily(tuple(ms), table, vectors, residual, zero_rows)


def _polyval(coeffs, A: np.ndarray) -> np.ndarray:
    """Horner evaluation of ``sum_k coeffs[k] A^k`` (ascending powers)."""
    n = A.shape[0]
    out = np.zeros_like(A, dtype=np.result_type(A, float))
    for c in reversed(list(coeffs)):
        out = out @ A + c * np.eye(n)
    return out


def polynomial_family(A, polys) -> CommutingFamily:
    """Family ``{p_i(A)}``; coefficients are in ascending powers of x.

    The table comes straight from the Schur form of ``A``: row i is ``p_i``
    applied to the Schur diagonal, so defective ``A`` is fine.
    """
    A = as_square(A, "A")
    polys = [list(p) for p in polys]
    if not polys:
        raise ValidationError("polynomial_family needs at least one polynomial")
    members = [_polyval(p, A) for p in polys]
    T, Z = scipy.linalg.schur(A.astype(complex), output="complex")
    t = np.diag(T)
    table = np.array([np.polynomial.polynomial.polyval(t, p) for p in polys], dtype=complex)
    residual, _ = commutation_residual(members)
    vectors = Z if _diagonal_in(Z, members) else None
    return CommutingFamily(tuple(members), table, vectors, residual, _has_zero_row_sums(members))


def _validate_bs(family: CommutingFamily, Bs):
    Bs = [as_square(B, f"B{k}") for k, B in enumerate(Bs)]
    if len(Bs) != family.r:
        raise ValidationError(f"need {family.r} inner matrices, got {len(Bs)}")
    m = Bs[0].shape[0]
    if any(B.shape[0] != m for B in Bs):
        raise ValidationError("inner matrices must share their order")
    return Bs


def kron_sum(family_or_members, Bs) -> np.ndarray:
    """Dense ``sum_i A_i (x) B_i`` (the brute-force side of the checks)."""
    members = getattr(family_or_members, "members", family_or_members)
    return sum(np.kron(A, B) for A, B in zip(members, Bs))


def kron_sum_spectrum(family: CommutingFamily, Bs) -> np.ndarray:
    """Eigenvalues of ``sum_i A_i (x) B_i`` from the m x m blocks
    ``sum_i lambda_ij B_i``, one block per joint index j."""
    Bs = _validate_bs(family, Bs)
    parts = []
    for j in range(family.joint_table.shape[1]):
        block = sum(lam * B for lam, B in zip(family.joint_table[:, j], Bs))
        parts.append(np.linalg.eigvals(block))
    values = np.concatenate(parts).astype(complex)
    scale = max(scale_of(B) for B in Bs) * max(1.0, np.abs(family.joint_table).max())
    dust = np.abs(values.imag) <= 1e-9 * scale
    values[dust] = values[dust].real
    return values[np.lexsort((values.imag, values.real))]


def zero_multiplicity(M, tol=ZERO_TOL) -> int:
    """Number of eigenvalues with modulus at most ``tol * max(1, ||M||_F)``."""
    M = as_square(M)
    return int(np.count_nonzero(np.abs(eig(M)) <= tol * scale_of(M)))


def joint_zero_indices(family: CommutingFamily, tol=ZERO_TOL) -> list:
    scale = max(scale_of(A) for A in family.members)
    zero = np.all(np.abs(family.joint_table) <= tol * scale, axis=0)
    return [int(j) for j in np.flatnonzero(zero)]


def joint_zero_index(family: CommutingFamily, tol=ZERO_TOL) -> JointZeroIndex:
    """The unique joint index where every member has eigenvalue 0.

    Needs a family of Laplacians whose graph-sum reversal has a spanning
    directed tree; otherwise the candidate indices are reported in a
    :class:`HypothesisError` rather than guessed.
    """
    if not family.zero_row_sums:
        raise HypothesisError("joint_zero_index needs zero-row-sum members", reason="row_sums")
    idx = joint_zero_indices(family, tol)
    try:
        graphs = [from_laplacian(A.real) for A in family.members]
    except ValidationError:
        graphs = None
    if graphs is not None and not has_spanning_directed_tree(reversal(graph_sum(graphs)))[0]:
        raise HypothesisError(
            f"graph-sum reversal has no spanning directed tree; joint zero indices {idx}",
            reason="no_spanning_tree",
        )
    if len(idx) != 1:
        raise HypothesisError(
            f"expected exactly one joint zero index, found {idx}", reason="joint_zero"
        )
    n = family.n
    return JointZeroIndex(idx[0], np.ones(n) / np.sqrt(n))
