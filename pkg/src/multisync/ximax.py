"""The coupling threshold xi_M of a family of zero-row-sum matrices.

``xi`` is admissible when some irreducible symmetric ``U`` with zero row sums
and nonpositive off-diagonals satisfies ``U (G_k - xi I) >= 0`` (in the
symmetric-part sense) for every layer ``k``; xi_M is the supremum. At fixed
``xi`` this is an SDP feasibility problem, and xi_M is found by bisection.

Solver formulation
------------------
``U = Q W Q^T`` with ``Q`` an orthonormal basis of ``e``-perp and ``W``
symmetric, so ``U = U^T`` and ``Ue = 0`` hold by construction. Because ``e``
lies in the kernel of ``sym(U (G_k - xi I))``, the layer constraints are
equivalent to ``sym(W (H_k - xi I)) >= 0`` with ``H_k = Q^T G_k Q``. The
solver maximizes a common slack ``s``::

    sym(W (H_k - xi I)) >= s I,   W >= I,   (Q W Q^T)_ij <= 0,   tr W <= n kappa

and declares the problem feasible when ``s* >= -tol``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import MultisyncError, SolverError, ValidationError
from .graphs import support_strongly_connected
from .matrixcore import as_square, basis_e_perp, complete_laplacian, eig, eig_sym, scale_of, sym
from .sdp import LmiBlock, maximize_lmi

__all__ = [
    "SdpProblem",
    "FeasibilityCertificate",
    "SdpOutcome",
    "XiMaxResult",
    "BracketError",
    "sdp_feasible",
    "verify_certificate",
    "xi_lower_bound",
    "xi_upper_bound",
    "mu2",
    "xi_max",
    "initial_bracket",
]

log = logging.getLogger(__name__)

FEAS_TOL = 1e-7
DEFAULT_EPS = 1e-3
DEFAULT_KAPPA = 100.0
SUPPORT_TOL = 1e-12


class BracketError(MultisyncError):
    """The bisection bracket does not straddle xi_M."""


def _check_zero_rows(G, name="G"):
    G = as_square(G, name)
    if G.shape[0] < 2:
        raise ValidationError(f"{name} must have order >= 2")
    if np.abs(G.sum(axis=1)).max() > 1e-9 * scale_of(G):
        raise ValidationError(f"{name} must have zero row sums")
    return G


def _check_layers(G_list):
    G_list = [_check_zero_rows(G, f"G{k + 1}") for k, G in enumerate(G_list)]
    if not G_list:
        raise ValidationError("need at least one layer")
    n = G_list[0].shape[0]
    if any(G.shape[0] != n for G in G_list):
        raise ValidationError("all layers must share their order")
    return G_list


@dataclass(frozen=True)
class SdpProblem:
    G_list: tuple
    xi: float

    def __post_init__(self):
        object.__setattr__(self, "G_list", tuple(_check_layers(self.G_list)))
        object.__setattr__(self, "xi", float(self.xi))

    @property
    def n(self) -> int:
        return self.G_list[0].shape[0]

    @property
    def Q(self) -> np.ndarray:
        return basis_e_perp(self.n)


@dataclass(frozen=True)
class FeasibilityCertificate:
    """A matrix ``U`` together with the outcome of re-checking it."""

    U: np.ndarray
    xi: float
    verified: bool
    slacks: dict


@dataclass(frozen=True)
class SdpOutcome:
    feasible: bool
    xi: float
    slack_lower: float
    slack_upper: float
    certificate: FeasibilityCertificate | None
    newton_steps: int


@dataclass
class XiMaxResult:
    value: float
    bracket: tuple
    certificate_at_lb: FeasibilityCertificate
    epsilon: float
    iterations: int = 0
    nonconverged_as_infeasible: int = 0
    history: list = field(default_factory=list)


def verify_certificate(U, p: SdpProblem, tol=FEAS_TOL):
    """Re-check every SDP constraint for ``U`` using plain linear algebra.

    Returns ``(ok, report)``. ``ok`` also requires ``U`` to be irreducible,
    which the synchronization criteria need but the SDP does not encode.
    """
    U = as_square(U, "U")
    n = p.n
    if U.shape[0] != n:
        raise ValidationError(f"U has order {U.shape[0]}, problem has order {n}")
    scale = scale_of(U)
    Q = basis_e_perp(n)
    off = U - np.diag(np.diag(U))
    report = {
        "asymmetry": float(np.linalg.norm(U - U.T)),
        "row_sum_max": float(np.abs(U.sum(axis=1)).max()),
        "offdiag_max": float(off[~np.eye(n, dtype=bool)].max()),
        "min_eig_QtUQ": float(eig_sym(sym(Q.T @ U @ Q))[0]),
        "lmi_min_eig": [],
        "lmi_margin": [],
        "irreducible": support_strongly_connected(U, SUPPORT_TOL * scale),
    }
    for G in p.G_list:
        M = sym(U @ (G - p.xi * np.eye(n)))
        report["lmi_min_eig"].append(float(eig_sym(M)[0]))
        report["lmi_margin"].append(float(eig_sym(Q.T @ M @ Q)[0]))
    checks = {
        "symmetric": report["asymmetry"] <= 1e-10 * scale,
        "zero_row_sums": report["row_sum_max"] <= 1e-8 * scale,
        "nonpositive_offdiag": report["offdiag_max"] <= 1e-9 * scale,
        "QtUQ_geq_I": report["min_eig_QtUQ"] >= 1.0 - 1e-6,
        "lmi": min(report["lmi_min_eig"]) >= -tol * scale,
        "irreducible": report["irreducible"],
    }
    report["checks"] = checks
    return all(checks.values()), report


def _upper_basis(d):
    """Symmetric basis matrices for the upper-triangular entries of W."""
    idx = [(i, j) for i in range(d) for j in range(i, d)]
    S = np.zeros((len(idx), d, d))
    for a, (i, j) in enumerate(idx):
        S[a, i, j] = 1.0
        S[a, j, i] = 1.0
    return idx, S


def _certificate(W, p, tol):
    Q = p.Q
    U = Q @ W @ Q.T
    U = 0.5 * (U + U.T)
    ok, report = verify_certificate(U, p, tol)
    if not report["irreducible"]:
        # restore irreducibility without leaving the class: U + delta * L_K
        delta = 1e-6 * np.linalg.norm(U)
        U2 = U + delta * complete_laplacian(p.n)
        ok2, report2 = verify_certificate(U2, p, tol)
        if ok2:
            log.info("certificate support was reducible; perturbed by %.3g L_K", delta)
            U, ok, report = U2, ok2, report2
            report["perturbed_by_LK"] = delta
    return FeasibilityCertificate(U, p.xi, ok, report)


def sdp_feasible(
    p: SdpProblem,
    tol: float = FEAS_TOL,
    *,
    kappa: float = DEFAULT_KAPPA,
    maximize: bool = False,
    max_newton: int = 2000,
) -> SdpOutcome:
    """Decide feasibility of the SDP at ``p.xi``.

    With ``maximize=False`` the barrier run stops as soon as the sign of the
    optimal slack is settled. ``maximize=True`` drives the slack to its
    optimum, which gives the certificate with the largest margin and brackets
    the optimal slack between ``slack_lower`` and ``slack_upper``.
    Raises :class:`SolverError` if the Newton budget is exhausted.
    """
    n = p.n
    d = n - 1
    Q = p.Q
    idx, S = _upper_basis(d)
    nw = len(idx)
    blocks = []
    for G in p.G_list:
        M = Q.T @ G @ Q - p.xi * np.eye(d)
        Fa = np.empty((nw + 1, d, d))
        prod = S @ M
        Fa[:nw] = 0.5 * (prod + prod.transpose(0, 2, 1))
        Fa[nw] = -np.eye(d)
        blocks.append(LmiBlock(np.zeros((d, d)), Fa))
    Fa = np.zeros((nw + 1, d, d))
    Fa[:nw] = S
    blocks.append(LmiBlock(-np.eye(d), Fa))

    QSQ = np.einsum("ij,ajk,lk->ail", Q, S, Q)
    iu = np.triu_indices(n, 1)
    G_lin = np.zeros((len(iu[0]) + 1, nw + 1))
    G_lin[:-1, :nw] = QSQ[:, iu[0], iu[1]].T
    G_lin[-1, :nw] = [1.0 if i == j else 0.0 for i, j in idx]
    h = np.zeros(len(iu[0]) + 1)
    h[-1] = n * kappa

    W0 = 2.0 * np.eye(d)
    x0 = np.zeros(nw + 1)
    x0[:nw] = [W0[i, j] for i, j in idx]
    s0 = min(eig_sym(sym(W0 @ (Q.T @ G @ Q - p.xi * np.eye(d))))[0] for G in p.G_list)
    x0[nw] = s0 - 1.0
    c = np.zeros(nw + 1)
    c[nw] = 1.0

    def stop(x, gap):
        if maximize:
            return False
        s = x[nw]
        return s + gap < -tol or s >= 0.0

    res = maximize_lmi(c, blocks, x0, G_lin, h, stop=stop, max_newton=max_newton,
                       gap_tol=1e-3 * tol)
    s = float(res.x[nw])
    feasible = s >= -tol
    cert = None
    if feasible:
        W = np.zeros((d, d))
        for a, (i, j) in enumerate(idx):
            W[i, j] = W[j, i] = res.x[a]
        cert = _certificate(W, p, tol)
    return SdpOutcome(feasible, p.xi, s, s + res.gap, cert, res.newton_steps)


def _e_perp_blocks(G):
    Q = basis_e_perp(G.shape[0])
    return Q.T @ G @ Q


def xi_lower_bound(G_list) -> float:
    """``min_k min_{x perp e} x^T G_k x / x^T x``: admissible with ``U = L_K``."""
    G_list = _check_layers(G_list)
    return float(min(eig_sym(sym(_e_perp_blocks(G)))[0] for G in G_list))


def mu2(G) -> float:
    """Smallest real part over the eigenvalues of ``G`` other than the one at ``e``.

    Computed on the e-perp block ``Q^T G Q``, whose spectrum is that of ``G``
    with one zero removed.
    """
    G = _check_zero_rows(G)
    return float(eig(_e_perp_blocks(G)).real.min())


def xi_upper_bound(G_list) -> float:
    """``min_k mu2(G_k)``; no admissible xi exceeds it."""
    G_list = _check_layers(G_list)
    return min(mu2(G) for G in G_list)


def initial_bracket(G_list):
    lo, hi = xi_lower_bound(G_list), xi_upper_bound(G_list)
    span = max(1.0, hi - lo)
    return lo - 0.1 * span, hi + 0.1 * span


def xi_max(
    G_list,
    epsilon: float = DEFAULT_EPS,
    lb: float | None = None,
    ub: float | None = None,
    *,
    tol: float = FEAS_TOL,
    kappa: float = DEFAULT_KAPPA,
) -> XiMaxResult:
    """Bisection for xi_M.

    Each step tests the midpoint and moves ``ub`` down if infeasible,
    ``lb`` up otherwise, until ``ub - lb <= epsilon``; the final midpoint is
    returned. Missing bracket ends come from the analytic bounds. The
    bracket is validated first: ``lb`` must be feasible and ``ub`` infeasible.
    A solver failure inside the loop counts as infeasible and is tallied in
    ``nonconverged_as_infeasible``.
    """
    G_list = _check_layers(G_list)
    if lb is None or ub is None:
        seed_lb, seed_ub = initial_bracket(G_list)
        lb = seed_lb if lb is None else lb
        ub = seed_ub if ub is None else ub
    if not ub > lb:
        raise BracketError(f"need lb < ub, got [{lb}, {ub}]")

    def solve(xi):
        return sdp_feasible(SdpProblem(G_list, xi), tol, kappa=kappa)

    first = solve(lb)
    if not first.feasible:
        raise BracketError(f"lower end {lb} is infeasible (slack <= {first.slack_upper:.3e})")
    cert = first.certificate
    try:
        top = solve(ub)
    except SolverError as exc:
        raise BracketError(f"solver failed at the upper end {ub}: {exc}") from exc
    if top.feasible:
        raise BracketError(f"upper end {ub} is feasible (slack {top.slack_lower:.3e})")

    result = XiMaxResult(0.0, (lb, ub), cert, epsilon)
    xi = 0.5 * (lb + ub)
    while abs(ub - lb) > epsilon:
        try:
            out = solve(xi)
            feasible = out.feasible
        except SolverError as exc:
            log.warning("solver failed at xi=%.6g (%s); treating as infeasible", xi, exc)
            result.nonconverged_as_infeasible += 1
            out, feasible = None, False
        result.history.append((xi, feasible))
        if feasible:
            lb = xi
            cert = out.certificate
        else:
            ub = xi
        xi = 0.5 * (lb + ub)
        result.iterations += 1
    result.value = xi
    result.bracket = (lb, ub)
    result.certificate_at_lb = cert
    return result
