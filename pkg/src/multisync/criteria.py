"""Executable synchronization criteria for multi-layer coupled systems.

Continuous time (``xdot_i = f(x_i) - sum_k (G_k (x) D_k) x``) and discrete
time (``x(p+1) = (I - sum_k G_k (x) D_k) F(x(p)) + u(p)``) criteria, plus the
stability-region map of coupled linear systems.

Every matrix inequality here has the consensus directions ``e (x) v`` in its
kernel, so margins are reported on the complement (``Q (x) I``); the PSD
verdict is unchanged and the margin is informative instead of pinned at 0.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import HypothesisError, NotPositiveDefiniteError, ValidationError
from .graphs import from_laplacian, graph_sum, has_spanning_directed_tree, reversal
from .graphs import support_strongly_connected
from .matrixcore import (
    as_square,
    basis_e_perp,
    cholesky_factor,
    eig,
    eig_sym,
    is_psd,
    scale_of,
    spectral_norm,
    sym,
)
from .spectra import CommutingFamily, commutation_residual, make_family, zero_multiplicity

__all__ = [
    "MultiNetworkSystem",
    "SyncVerdict",
    "GridSpec",
    "StabilityRegion",
    "check_class_w",
    "check_coupling_lmi",
    "threshold_spanning_tree",
    "check_spanning_tree_threshold",
    "check_certificate_criterion",
    "check_balanced_criterion",
    "discrete_criterion",
    "discrete_criterion_scalar",
    "phi",
    "stability_region",
    "is_synchronizing_linear",
]

VERDICT_TOL = 1e-9
SIMPLEX_STEP = 32


@dataclass(frozen=True, eq=False)
class MultiNetworkSystem:
    """n identical m-dimensional nodes coupled through r layers.

    ``modes`` optionally lists further ``(G_list, D_list)`` pairs for
    piecewise-constant switching; the primary pair is mode 0. ``dwell`` is
    the time (or number of steps) spent in each mode before cycling.
    """

    G_list: tuple
    D_list: tuple
    lipschitz_c: float = 1.0
    V: np.ndarray | None = None
    P: np.ndarray | None = None
    modes: tuple = ()
    dwell: float = 1.0

    def __post_init__(self):
        G = tuple(as_square(g, f"G{k + 1}") for k, g in enumerate(self.G_list))
        D = tuple(as_square(d, f"D{k + 1}") for k, d in enumerate(self.D_list))
        if not G or len(G) != len(D):
            raise ValidationError("need one inner matrix D_k per layer G_k")
        n, m = G[0].shape[0], D[0].shape[0]
        if any(g.shape[0] != n for g in G) or any(d.shape[0] != m for d in D):
            raise ValidationError("layer or inner-coupling orders disagree")
        for k, g in enumerate(G):
            if np.abs(g.sum(axis=1)).max() > 1e-9 * scale_of(g):
                raise ValidationError(f"G{k + 1} must have zero row sums")
        V = np.eye(m) if self.V is None else as_square(self.V, "V")
        P = np.zeros((m, m)) if self.P is None else as_square(self.P, "P")
        if V.shape[0] != m or P.shape[0] != m:
            raise ValidationError("V and P must be m x m")
        modes = []
        for Gm, Dm in self.modes:
            extra = MultiNetworkSystem(Gm, Dm)
            if extra.n != n or extra.m != m:
                raise ValidationError("switching modes must share n and m")
            modes.append((extra.G_list, extra.D_list))
        object.__setattr__(self, "G_list", G)
        object.__setattr__(self, "D_list", D)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "modes", tuple(modes))
        if self.lipschitz_c <= 0:
            raise ValidationError("lipschitz constant c must be positive")

    @property
    def n(self) -> int:
        return self.G_list[0].shape[0]

    @property
    def m(self) -> int:
        return self.D_list[0].shape[0]

    @property
    def r(self) -> int:
        return len(self.G_list)

    def all_modes(self):
        return [(self.G_list, self.D_list), *self.modes]

    def coupling(self, mode=0) -> np.ndarray:
        """Dense ``sum_k G_k (x) D_k`` for the given mode."""
        Gs, Ds = self.all_modes()[mode]
        return sum(np.kron(G, D) for G, D in zip(Gs, Ds))


@dataclass
class SyncVerdict:
    criterion: str
    satisfied: bool
    margin: float
    details: dict = field(default_factory=dict)
    strict: bool = False


def _verdict(name, margin, details, tol=VERDICT_TOL, strict=False):
    ok = margin > tol if strict else margin >= -tol
    return SyncVerdict(name, bool(ok), float(margin), details, strict)


def check_class_w(U, tol=1e-9):
    """Raise unless ``U`` is symmetric, zero-row-sum, has nonpositive
    off-diagonals and an irreducible support."""
    U = as_square(U, "U")
    s = scale_of(U)
    n = U.shape[0]
    if np.linalg.norm(U - U.T) > 1e-10 * s:
        raise HypothesisError("U is not symmetric", reason="class_w")
    if np.abs(U.sum(axis=1)).max() > 1e-8 * s:
        raise HypothesisError("U does not have zero row sums", reason="class_w")
    off = U[~np.eye(n, dtype=bool)]
    if off.size and off.max() > tol * s:
        raise HypothesisError("U has a positive off-diagonal entry", reason="class_w")
    if not support_strongly_connected(U, 1e-12 * s):
        raise HypothesisError("U is reducible", reason="irreducible")
    return U


def _perp_margin(M, n, m):
    """Minimum eigenvalue of ``sym(M)`` off the consensus subspace."""
    B = np.kron(basis_e_perp(n), np.eye(m))
    return float(eig_sym(B.T @ sym(M) @ B)[0])


def check_coupling_lmi(sys: MultiNetworkSystem, U, tol=VERDICT_TOL) -> SyncVerdict:
    """``(U (x) V)(sum_k G_k (x) D_k - I (x) P) >= 0`` for every mode."""
    U = check_class_w(U)
    if U.shape[0] != sys.n:
        raise ValidationError("U must be n x n")
    try:
        cholesky_factor(sys.V)
    except NotPositiveDefiniteError as exc:
        raise HypothesisError(f"V is not positive definite: {exc}", reason="V_pd") from exc
    n, m = sys.n, sys.m
    UV = np.kron(U, sys.V)
    IP = np.kron(np.eye(n), sys.P)
    margins, full = [], []
    for mode in range(len(sys.all_modes())):
        M = UV @ (sys.coupling(mode) - IP)
        margins.append(_perp_margin(M, n, m))
        full.append(float(eig_sym(sym(M))[0]))
    details = {"mode_margins": margins, "full_space_min_eig": full}
    return _verdict("coupling_lmi", min(margins), details, tol * scale_of(UV))


def _as_family(fam_or_list, seed=0) -> CommutingFamily:
    if isinstance(fam_or_list, CommutingFamily):
        return fam_or_list
    return make_family(list(fam_or_list), seed=seed)


def _require_spanning_tree(family):
    try:
        graphs = [from_laplacian(A.real) for A in family.members]
    except ValidationError as exc:
        raise HypothesisError(f"members are not Laplacians: {exc}", reason="laplacian") from exc
    if not has_spanning_directed_tree(reversal(graph_sum(graphs)))[0]:
        raise HypothesisError(
            "graph-sum reversal has no spanning directed tree", reason="no_spanning_tree"
        )


def _is_normal(A, tol=1e-9):
    return np.linalg.norm(A @ A.conj().T - A.conj().T @ A) <= tol * scale_of(A) ** 2


def _simplex_grid(r, steps):
    for comp in itertools.product(range(steps + 1), repeat=r - 1):
        if sum(comp) <= steps:
            yield np.array([*comp, steps - sum(comp)], dtype=float) / steps


def _min_real_over_hull(D_list):
    """Smallest real part of an eigenvalue over conv(D_k), and whether exact."""
    residual, _ = commutation_residual(D_list)
    if residual <= 1e-8:
        # aligned eigenvalues are affine in the weights: minimum at a vertex
        fam = make_family(D_list)
        return float(fam.joint_table.real.min()), True
    vals = [eig(D).real.min() for D in D_list]
    for theta in _simplex_grid(len(D_list), SIMPLEX_STEP):
        vals.append(eig(sum(t * D for t, D in zip(theta, D_list))).real.min())
    return float(min(vals)), False


def threshold_spanning_tree(L_family, D_list, c: float) -> float:
    """Coupling threshold ``c / (Re lambda_L * Re lambda_D)`` for ``G_k = xi L_k``.

    ``lambda_L`` is the non-consensus joint eigenvalue of the graph sum
    ``sum_i L_i`` with smallest real part; ``lambda_D`` the eigenvalue of
    smallest real part over the convex hull of the ``D_k``.
    """
    fam = _as_family(L_family)
    D_list = [as_square(D, "D") for D in D_list]
    if len(D_list) != fam.r:
        raise ValidationError("need one D_k per layer")
    if not all(_is_normal(A) for A in fam.members):
        raise HypothesisError("layer Laplacians must be normal", reason="normal")
    if not all(_is_normal(D) for D in D_list):
        raise HypothesisError("inner coupling matrices must be normal", reason="normal")
    _require_spanning_tree(fam)
    sums = fam.joint_table.sum(axis=0)[1:]
    lam_L = float(sums.real.min())
    lam_D, exact = _min_real_over_hull(D_list)
    if not exact:
        warnings.warn("lambda_D over a non-commuting hull is a grid estimate", stacklevel=2)
    if lam_D <= 1e-12:
        raise HypothesisError(
            f"conv(D_k) contains a matrix with eigenvalue real part {lam_D:.3g} <= 0",
            reason="lambda_D",
        )
    if lam_L <= 0:
        raise HypothesisError("graph-sum eigenvalue with nonpositive real part", reason="lambda_L")
    return c / (lam_L * lam_D)


def check_spanning_tree_threshold(L_family, D_list, c: float, xi: float) -> SyncVerdict:
    """Verdict form of :func:`threshold_spanning_tree` for coupling strength xi."""
    thr = threshold_spanning_tree(L_family, D_list, c)
    return _verdict("spanning_tree_threshold", xi - thr, {"threshold": thr, "xi": xi})


def check_certificate_criterion(G_list, D_list, V, xi: float, U, tol=VERDICT_TOL) -> SyncVerdict:
    """``U (G_k - xi I) >= 0`` for every layer, with ``V D_k >= 0`` required."""
    G_list = [as_square(G, "G") for G in G_list]
    V = as_square(V, "V")
    for k, D in enumerate(D_list):
        verdict = is_psd(V @ as_square(D, "D"))
        if not verdict.is_psd:
            raise HypothesisError(
                f"V D_{k + 1} is not positive semidefinite "
                f"(min eig {verdict.min_sym_eigenvalue:.3g})",
                reason="VD_psd",
            )
    U = check_class_w(U)
    n = U.shape[0]
    Q = basis_e_perp(n)
    margins = [
        float(eig_sym(Q.T @ sym(U @ (G - xi * np.eye(n))) @ Q)[0]) for G in G_list
    ]
    return _verdict("certificate", min(margins), {"layer_margins": margins, "xi": xi},
                    tol * scale_of(U))


def check_balanced_criterion(G_list, xi: float, tol=VERDICT_TOL) -> SyncVerdict:
    """``lambda_2(sym(G_k)) >= xi`` for balanced layers with simple zero."""
    lam2 = []
    for k, G in enumerate(G_list):
        G = as_square(G, "G")
        s = scale_of(G)
        if np.abs(G.sum(axis=1)).max() > 1e-10 * s:
            raise HypothesisError(f"G{k + 1}: zero row sums violated", reason="row_sums")
        if np.abs(G.sum(axis=0)).max() > 1e-10 * s:
            raise HypothesisError(f"G{k + 1}: zero column sums violated", reason="column_sums")
        if zero_multiplicity(G + G.T) != 1:
            raise HypothesisError(
                f"G{k + 1} + G{k + 1}^T does not have a simple zero eigenvalue",
                reason="simple_zero",
            )
        lam2.append(float(eig_sym(sym(G))[1]))
    return _verdict("balanced", min(lam2) - xi, {"lambda2": lam2, "xi": xi}, tol)


def _normal_layer_family(families):
    fam = _as_family(families)
    if not fam.zero_row_sums:
        raise HypothesisError("layers must have zero row sums", reason="row_sums")
    if not fam.is_normal() or fam.alignment_vectors is None:
        raise HypothesisError("layers must be normal and commuting", reason="normal")
    return fam


def discrete_criterion(families, D_list, V, c: float, tol=VERDICT_TOL) -> SyncVerdict:
    """Strict test ``||I - sum_k lambda_kj C D_k C^-1||_2 < 1/sqrt(c)`` for every
    joint index ``j`` other than the consensus one, where ``V = C^T C``."""
    fam = _normal_layer_family(families)
    D_list = [as_square(D, "D") for D in D_list]
    if len(D_list) != fam.r:
        raise ValidationError("need one D_k per layer")
    C = cholesky_factor(as_square(V, "V"))
    Cinv = np.linalg.inv(C)
    CDC = [C @ D @ Cinv for D in D_list]
    m = D_list[0].shape[0]
    norms = []
    for j in range(1, fam.n):
        M = np.eye(m) - sum(lam * X for lam, X in zip(fam.joint_table[:, j], CDC))
        norms.append(spectral_norm(M))
    worst = max(norms) if norms else 0.0
    bound = 1.0 / np.sqrt(c)
    return _verdict("discrete", bound - worst, {"norms": norms, "bound": bound}, tol, strict=True)


def discrete_criterion_scalar(families, D_family, c: float, tol=VERDICT_TOL) -> SyncVerdict:
    """Simplified discrete test for ``V = I`` and normal commuting ``D_k``:
    ``|1 - sum_k lambda_ki mu_kj| < 1/sqrt(c)`` over all non-consensus i and all j."""
    fam = _normal_layer_family(families)
    dfam = _as_family(D_family)
    if not dfam.is_normal():
        raise HypothesisError("inner coupling matrices must be normal", reason="normal")
    lam = fam.joint_table[:, 1:]
    mu = dfam.joint_table
    vals = np.abs(1.0 - np.einsum("ki,kj->ij", lam, mu))
    worst = float(vals.max()) if vals.size else 0.0
    bound = 1.0 / np.sqrt(c)
    return _verdict("discrete_scalar", bound - worst, {"bound": bound}, tol, strict=True)


def phi(A, D_list, point) -> float:
    """Largest real part of ``eig(A + sum_k point[k] D_k)``."""
    M = np.asarray(A, dtype=complex) + sum(x * np.asarray(D) for x, D in zip(point, D_list))
    return float(np.linalg.eigvals(M).real.max())


@dataclass(frozen=True)
class GridSpec:
    """Rectangular grid for the first layer's eigenvalue; for two layers the
    second layer's value is fixed per slice."""

    re_min: float = -2.0
    re_max: float = 2.0
    re_num: int = 41
    im_min: float = -2.0
    im_max: float = 2.0
    im_num: int = 41
    slices: tuple = ()

    def points(self, r: int) -> np.ndarray:
        re = np.linspace(self.re_min, self.re_max, self.re_num)
        im = np.linspace(self.im_min, self.im_max, self.im_num)
        first = (re[None, :] + 1j * im[:, None]).ravel()
        if r == 1:
            return first[:, None]
        if r == 2:
            slices = self.slices or (0.0,)
            return np.array([(z, complex(s)) for s in slices for z in first])
        raise ValidationError("grid sampling supports r <= 2; use phi() pointwise")


@dataclass
class StabilityRegion:
    A: np.ndarray
    D_list: tuple
    grid: np.ndarray
    phi_values: np.ndarray

    def stable_mask(self):
        return self.phi_values < 0

    def rows(self):
        """CSV rows ``(re, im[, re2, im2], phi)``."""
        for point, value in zip(self.grid, self.phi_values):
            row = []
            for z in point:
                row += [z.real, z.imag]
            yield row + [value]

    def header(self):
        cols = ["re", "im"] if self.grid.shape[1] == 1 else ["re", "im", "re2", "im2"]
        return cols + ["phi"]


def stability_region(A, D_list, grid_spec: GridSpec | None = None) -> StabilityRegion:
    A = as_square(A, "A")
    D_list = tuple(as_square(D, "D") for D in D_list)
    grid = (grid_spec or GridSpec()).points(len(D_list))
    values = np.array([phi(A, D_list, pt) for pt in grid])
    return StabilityRegion(A, D_list, grid, values)


def is_synchronizing_linear(A, b, families, D_list, tol=VERDICT_TOL) -> SyncVerdict:
    """Linear network ``xdot = (I (x) A) x - sum_k (G_k (x) D_k) x + 1 (x) b``.

    Its transverse blocks are ``A - sum_k lambda_kj D_k``, i.e. ``phi`` at the
    negated joint eigenvalues; all non-consensus indices must have ``phi < 0``.
    ``b`` only shifts the synchronized solution and is not used.
    """
    del b
    fam = _as_family(families)
    if not fam.zero_row_sums:
        raise HypothesisError("no consensus index: layers need zero row sums",
                              reason="joint_zero")
    A = as_square(A, "A")
    values = [phi(A, D_list, -fam.joint_table[:, j]) for j in range(1, fam.n)]
    worst = max(values) if values else -np.inf
    return _verdict("linear", -worst, {"phi": values}, tol, strict=True)
