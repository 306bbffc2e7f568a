"""Weighted digraphs, their Laplacians and connectivity predicates.

Orientation convention
----------------------
``weights[i, j] > 0`` is the edge ``i -> j`` of the digraph, so row sums are
out-degrees and the Laplacian is ``L = D - A`` with ``D`` the out-degrees.
In the coupled network the same entry means that node ``j``'s state enters
node ``i``'s equation; influence therefore flows along the *reversed* edge.
Consequently ``sum(L_i)`` has a simple zero eigenvalue exactly when
``reversal(graph_sum(...))`` has a spanning directed tree, and that is the
form every caller in this package uses.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .matrixcore import as_square, scale_of

__all__ = [
    "WeightedDigraph",
    "laplacian",
    "from_laplacian",
    "graph_sum",
    "reversal",
    "reachable_from",
    "has_spanning_directed_tree",
    "is_balanced",
    "is_strongly_connected",
    "support_strongly_connected",
    "directed_cycle",
    "directed_path",
    "circulant",
    "three_layer_example",
    "two_layer_circulant_example",
    "graph_from_json",
    "graph_to_json",
]

ROW_SUM_TOL = 1e-10
BALANCE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Nonnegative weighted digraph on vertices ``0..n-1``."""

    weights: np.ndarray

    def __post_init__(self):
        W = as_square(self.weights, "weights").astype(float)
        if np.any(W < 0):
            raise ValidationError("edge weights must be nonnegative")
        if np.any(np.diag(W) != 0):
            raise ValidationError("adjacency diagonal must be exactly zero")
        W = W.copy()
        W.setflags(write=False)
        object.__setattr__(self, "weights", W)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


def laplacian(g: WeightedDigraph) -> np.ndarray:
    """``L = D - A`` with ``D`` the diagonal of row sums; ``L e = 0`` exactly."""
    A = g.weights
    L = -A.copy()
    # exact zero row sums: diagonal is the negated sum of the row's off-diagonals
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def from_laplacian(L) -> WeightedDigraph:
    """Recover the digraph whose Laplacian is ``L``.

    ``L`` must have zero row sums and nonpositive off-diagonal entries.
    """
    L = as_square(L, "laplacian")
    if np.abs(L.sum(axis=1)).max() > ROW_SUM_TOL * scale_of(L):
        raise ValidationError("Laplacian rows must sum to zero")
    A = -L.copy()
    np.fill_diagonal(A, 0.0)
    if np.any(A < 0):
        raise ValidationError("Laplacian off-diagonal entries must be <= 0")
    return WeightedDigraph(A)


def graph_sum(gs) -> WeightedDigraph:
    gs = list(gs)
    if not gs:
        raise ValidationError("graph_sum needs at least one graph")
    n = gs[0].n
    if any(g.n != n for g in gs):
        raise ValidationError("graph_sum needs graphs on the same vertex set")
    return WeightedDigraph(sum(g.weights for g in gs))


def reversal(g: WeightedDigraph) -> WeightedDigraph:
    return WeightedDigraph(g.weights.T)


def reachable_from(g: WeightedDigraph, root: int) -> set:
    """Vertices reachable from ``root`` along edges ``i -> j`` (weights[i, j] > 0)."""
    adj = g.weights > 0
    seen = {root}
    queue = deque([root])
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(adj[i]):
            j = int(j)
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return seen


def has_spanning_directed_tree(g: WeightedDigraph):
    """Return ``(exists, roots)`` where roots reach every vertex of ``g``."""
    roots = frozenset(r for r in range(g.n) if len(reachable_from(g, r)) == g.n)
    return bool(roots), roots


def is_balanced(g: WeightedDigraph, tol=BALANCE_TOL) -> bool:
    """Weighted in-degree equals out-degree at every vertex."""
    W = g.weights
    return bool(np.abs(W.sum(axis=0) - W.sum(axis=1)).max() <= tol * scale_of(W))


def is_strongly_connected(g: WeightedDigraph) -> bool:
    return len(reachable_from(g, 0)) == g.n and len(reachable_from(reversal(g), 0)) == g.n


def support_strongly_connected(M, tol=0.0) -> bool:
    """Strong connectivity of the off-diagonal support ``|M_ij| > tol``.

    For a square matrix this is irreducibility.
    """
    M = np.asarray(M)
    S = (np.abs(M) > tol).astype(float)
    np.fill_diagonal(S, 0.0)
    return is_strongly_connected(WeightedDigraph(S))


def directed_cycle(n: int, weight=1.0) -> WeightedDigraph:
    """Cycle with edges ``i -> i+1 (mod n)``."""
    return circulant(n, {1: weight})


def directed_path(n: int, weight=1.0) -> WeightedDigraph:
    """Path with edges ``i -> i+1``; vertex 0 reaches everyone."""
    W = np.zeros((n, n))
    for i in range(n - 1):
        W[i, i + 1] = weight
    return WeightedDigraph(W)


def circulant(n: int, shifts) -> WeightedDigraph:
    """Circulant digraph with edges ``i -> i+s (mod n)`` of the given weights.

    ``shifts`` maps shift ``s`` (1..n-1) to its weight. Laplacians of
    circulant digraphs on the same n commute.
    """
    W = np.zeros((n, n))
    for s, w in dict(shifts).items():
        s = int(s) % n
        if s == 0:
            raise ValidationError("circulant shift must be nonzero mod n")
        for i in range(n):
            W[i, (i + s) % n] += w
    return WeightedDigraph(W)


_G1 = [
    [1, 0, -1, 0, 0],
    [0, 2, 0, -1, -1],
    [-1, 0, 3, -1, -1],
    [-1, -1, 0, 3, -1],
    [0, 0, 0, -1, 1],
]
_G2 = [
    [2, -1, 0, 0, -1],
    [0, 1, 0, -1, 0],
    [0, 0, 2, -1, -1],
    [-1, 0, 0, 1, 0],
    [-1, 0, -1, -1, 3],
]
_G3 = [
    [1, -1, 0, 0, 0],
    [-1, 2, -1, 0, 0],
    [0, -1, 1, 0, 0],
    [0, 0, -1, 1, 0],
    [-1, -1, -1, 0, 3],
]


def three_layer_example():
    """The three 5-node directed Laplacians of the worked xi_M example."""
    return tuple(np.array(G, dtype=float) for G in (_G1, _G2, _G3))


def two_layer_circulant_example():
    """Two commuting circulant layers on 6 vertices.

    Layer A (shift 2) is two disjoint 3-cycles and layer B (shift 3) is three
    disjoint 2-cycles; neither is connected but their graph sum is strongly
    connected.
    """
    return circulant(6, {2: 1.0}), circulant(6, {3: 1.0})


def graph_from_json(obj) -> WeightedDigraph:
    """Parse ``{"n", "weights"}`` or ``{"n", "laplacian"}``."""
    if not isinstance(obj, dict) or "n" not in obj:
        raise ValidationError('graph JSON needs an "n" field')
    n = obj["n"]
    if "weights" in obj:
        g = WeightedDigraph(np.array(obj["weights"], dtype=float))
    elif "laplacian" in obj:
        g = from_laplacian(np.array(obj["laplacian"], dtype=float))
    else:
        raise ValidationError('graph JSON needs "weights" or "laplacian"')
    if g.n != n:
        raise ValidationError(f'declared n={n} but matrix has order {g.n}')
    return g


def graph_to_json(g: WeightedDigraph) -> dict:
    return {"n": g.n, "weights": g.weights.tolist()}
