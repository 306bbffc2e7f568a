"""Small dense log-barrier solver for linear matrix inequalities.

Solves::

    maximize    c^T x
    subject to  F_b(x) = F_b0 + sum_a x_a F_ba  > 0      (each block b)
                h - G x > 0                               (elementwise)

by the classical barrier method: for increasing ``t``, Newton-center
``-t c^T x - sum_b logdet F_b(x) - sum log(h - G x)``. After centering, the
optimum is within ``nu / t`` of ``c^T x`` where ``nu`` is the total barrier
degree. Intended for problems with at most a few hundred variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import SolverError

__all__ = ["LmiBlock", "BarrierResult", "maximize_lmi"]


@dataclass
class LmiBlock:
    """``F(x) = F0 + sum_a x[a] * Fa[a]``; ``Fa`` has shape (p, d, d)."""

    F0: np.ndarray
    Fa: np.ndarray

    def value(self, x):
        return self.F0 + np.tensordot(x, self.Fa, axes=1)


@dataclass
class BarrierResult:
    x: np.ndarray
    objective: float
    gap: float
    newton_steps: int
    stopped_early: bool


def _chol(M):
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return None


def _barrier(x, blocks, G, h):
    """Barrier value, gradient and Hessian (objective excluded); ``None``
    outside the domain."""
    val = 0.0
    grad = np.zeros(x.size)
    hess = np.zeros((x.size, x.size))
    for blk in blocks:
        L = _chol(blk.value(x))
        if L is None:
            return None
        val -= 2.0 * np.log(np.diag(L)).sum()
        Linv = np.linalg.inv(L)
        Ft = np.einsum("ij,ajk,lk->ail", Linv, blk.Fa, Linv, optimize=True)
        grad = grad - np.trace(Ft, axis1=1, axis2=2)
        flat = Ft.reshape(Ft.shape[0], -1)
        hess += flat @ flat.T
    if G is not None:
        slack = h - G @ x
        if np.any(slack <= 0):
            return None
        val -= np.log(slack).sum()
        inv = 1.0 / slack
        grad = grad + G.T @ inv
        hess += (G.T * inv**2) @ G
    return val, grad, hess


def _feasible(x, blocks, G, h):
    if G is not None and np.any(h - G @ x <= 0):
        return False
    return all(_chol(b.value(x)) is not None for b in blocks)


def maximize_lmi(
    c: np.ndarray,
    blocks: Sequence[LmiBlock],
    x0: np.ndarray,
    G: np.ndarray | None = None,
    h: np.ndarray | None = None,
    *,
    t0: float = 1.0,
    mu: float = 20.0,
    gap_tol: float = 1e-10,
    max_newton: int = 600,
    stop: Callable[[np.ndarray, float], bool] | None = None,
) -> BarrierResult:
    """Run the barrier method from the strictly feasible point ``x0``.

    ``stop(x, gap)`` is consulted after each centering and may end the run
    early (used by feasibility tests that only need a sign).
    """
    x = np.asarray(x0, dtype=float).copy()
    if not _feasible(x, blocks, G, h):
        raise SolverError("starting point is not strictly feasible")
    nu = sum(b.F0.shape[0] for b in blocks) + (0 if G is None else G.shape[0])
    t = t0
    steps = 0
    while True:
        # centering; the objective term t*c^T x is tracked by differences
        # so the Armijo test does not drown in its magnitude
        inner = 0
        while True:
            out = _barrier(x, blocks, G, h)
            if out is None:
                raise SolverError("iterate left the barrier domain")
            f, g, H = out
            g = g - t * c
            try:
                dx = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                dx = -np.linalg.lstsq(H, g, rcond=None)[0]
            dec = float(-(g @ dx))
            if dec / 2.0 <= 1e-9 or inner >= 80:
                break
            alpha = 1.0
            while True:
                xn = x + alpha * dx
                outn = _barrier(xn, blocks, G, h)
                if outn is not None and outn[0] - f - t * alpha * (c @ dx) <= -0.25 * alpha * dec:
                    break
                alpha *= 0.5
                if alpha < 1e-14:
                    break
            if alpha < 1e-14:
                # no progress possible at this precision; treat as centered
                break
            x = xn
            steps += 1
            inner += 1
            if steps > max_newton:
                raise SolverError(f"barrier method exceeded {max_newton} Newton steps")
        gap = nu / t
        if stop is not None and stop(x, gap):
            return BarrierResult(x, float(c @ x), gap, steps, True)
        if gap <= gap_tol:
            return BarrierResult(x, float(c @ x), gap, steps, False)
        t *= mu
