"""Random and canned instances used by the tests, acceptance suite and scripts."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .criteria import MultiNetworkSystem, check_certificate_criterion
from .graphs import WeightedDigraph, circulant, laplacian, three_layer_example
from .matrixcore import unit_diag
from .sim import NodeDynamics, affine, logistic_map, lorenz, required_feedback
from .ximax import SdpProblem, sdp_feasible, xi_max

__all__ = [
    "random_balanced_layer",
    "random_digraph",
    "random_circulant_laplacian",
    "random_circulant_family",
    "permute",
    "CertifiedInstance",
    "certified_ct_instance",
    "DiscreteInstance",
    "discrete_instance",
    "HORIZON",
]

# documented horizons for certified continuous-time runs (time units)
HORIZON = {"affine": 30.0, "lorenz": 15.0}


def random_balanced_layer(rng, n, extra_cycles=2) -> np.ndarray:
    """Laplacian of a random balanced, strongly connected digraph: a
    Hamiltonian cycle plus a few random cycles, each with one weight."""
    W = np.zeros((n, n))
    order = rng.permutation(n)
    cycles = [order]
    for _ in range(rng.integers(0, extra_cycles + 1)):
        k = rng.integers(2, n + 1)
        cycles.append(rng.choice(n, size=k, replace=False))
    for cyc in cycles:
        w = rng.uniform(0.5, 1.5)
        for a, b in zip(cyc, np.roll(cyc, -1)):
            W[a, b] += w
    return laplacian(WeightedDigraph(W))


def random_digraph(rng, n, density=0.3) -> WeightedDigraph:
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    return WeightedDigraph(mask * rng.uniform(0.5, 2.0, size=(n, n)))


def random_circulant_laplacian(rng, n, shifts_pool, max_shifts=2, symmetric=False):
    pool = list(shifts_pool)
    k = int(rng.integers(1, min(max_shifts, len(pool)) + 1))
    chosen = rng.choice(pool, size=k, replace=False)
    weights = {}
    for s in chosen:
        w = float(rng.uniform(0.5, 1.5))
        weights[int(s)] = weights.get(int(s), 0.0) + w
        if symmetric and (n - s) % n != s:
            weights[int(n - s)] = weights.get(int(n - s), 0.0) + w
    return laplacian(circulant(n, weights))


def _shift_gcd(Ls, n):
    g = n
    for L in Ls:
        for s in range(1, n):
            if L[0, s] != 0:
                g = gcd(g, s)
    return g


def random_circulant_family(rng, n, r, connected=True, symmetric=False, max_tries=200):
    """``r`` commuting circulant Laplacians on ``n`` vertices.

    With ``connected=True`` the graph sum is strongly connected (shifts
    generate Z_n); otherwise every shift is a multiple of a divisor ``d > 1``
    of ``n`` and the sum splits into ``d`` components.
    """
    if connected:
        for _ in range(max_tries):
            Ls = [random_circulant_laplacian(rng, n, range(1, n), symmetric=symmetric)
                  for _ in range(r)]
            if _shift_gcd(Ls, n) == 1:
                return Ls
        raise RuntimeError("could not draw a connected circulant family")
    divisors = [d for d in range(2, n) if n % d == 0]
    if not divisors:
        raise ValueError(f"n={n} is prime; circulant layers cannot be disconnected")
    d = int(rng.choice(divisors))
    pool = range(d, n, d)
    return [random_circulant_laplacian(rng, n, pool, symmetric=symmetric) for _ in range(r)]


def permute(Ls, perm):
    """Relabel vertices; commutation and spectra are preserved."""
    P = np.eye(len(perm))[perm]
    return [P @ L @ P.T for L in Ls]


def _random_drift(rng, m, low=-0.5, high=0.3):
    """Skew part plus a symmetric part with spectrum in [low, high]: nodes
    oscillate and may grow slowly, so the synchronized orbit stays bounded
    over the horizon while transverse errors need the coupling to decay."""
    S = rng.standard_normal((m, m))
    Qm, _ = np.linalg.qr(rng.standard_normal((m, m)))
    sym_part = Qm @ np.diag(rng.uniform(low, high, m)) @ Qm.T
    return (S - S.T) + sym_part


@dataclass
class CertifiedInstance:
    """A continuous-time system certified synchronizing by the ``U (G_k - xi I)``
    criterion, with everything needed to re-check and simulate it."""

    system: MultiNetworkSystem
    dynamics: NodeDynamics
    layers: list
    gain: float
    feedback: float
    U: np.ndarray
    margin: float
    xi_m: float
    center: np.ndarray
    horizon: float


def certified_ct_instance(rng, kind="affine", layers=None, c=1.0, fraction=0.8,
                          min_margin=0.05):
    """Scale ``layers`` until ``G_k = gain * L_k`` is certified.

    The feedback ``xi_P`` is the smallest value making
    ``f - xi_P sum_k D_k`` contract at rate ``c`` (with ``V = I``); a max-slack
    certificate ``U`` is computed at ``fraction * xi_M(L)`` and the gain is
    ``xi_P / (fraction * xi_M)``, increased if needed so the margin exceeds
    ``min_margin``. Returns ``None`` when ``xi_M(L) <= 0``.
    """
    if kind == "lorenz":
        f = lorenz()
        m = 3
        layers = list(three_layer_example()) if layers is None else layers
        center = np.array([1.0, 1.0, 20.0])
    elif kind == "affine":
        m = len(layers) if layers is not None else int(rng.integers(2, 4))
        f = affine(_random_drift(rng, m), rng.standard_normal(m))
        center = rng.standard_normal(m)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    if layers is None:
        n = int(rng.integers(4, 7))
        layers = [random_balanced_layer(rng, n) for _ in range(m)]
    r = len(layers)
    D_list = [unit_diag(k % m, m) * (1.0 if kind == "lorenz" else rng.uniform(0.5, 1.5))
              for k in range(r)]
    xi_p = required_feedback(f, sum(D_list), c=c)
    xm = xi_max(layers).value
    if xm <= 0:
        return None
    xi_cert = fraction * xm
    out = sdp_feasible(SdpProblem(layers, xi_cert), maximize=True)
    U = out.certificate.U
    gain = max(xi_p, 1e-3) / xi_cert
    G_list = [gain * L for L in layers]
    margin = check_certificate_criterion(G_list, D_list, np.eye(m), xi_p, U).margin
    if margin < min_margin:
        gain *= 2.0 * min_margin / max(margin, 1e-12)
        G_list = [gain * L for L in layers]
        margin = check_certificate_criterion(G_list, D_list, np.eye(m), xi_p, U).margin
    system = MultiNetworkSystem(G_list, D_list, lipschitz_c=c, P=xi_p * sum(D_list))
    return CertifiedInstance(system, f, layers, gain, xi_p, U, margin, xm, center,
                             HORIZON[kind])


@dataclass
class DiscreteInstance:
    system: MultiNetworkSystem
    dynamics: NodeDynamics
    family_layers: list
    mus: list
    c: float


def _split_shift_pairs(rng, n, r, low, high):
    """Symmetric circulant layers whose shift pairs {s, n-s} partition 1..n-1."""
    pairs = list(range(1, n // 2 + 1))
    owner = rng.permutation(np.arange(len(pairs)) % r)
    Ls = []
    for k in range(r):
        weights = {}
        for s, o in zip(pairs, owner):
            if o == k:
                w = float(rng.uniform(low, high))
                weights[s] = w
                if n - s != s:
                    weights[n - s] = w
        Ls.append(laplacian(circulant(n, weights)) if weights else np.zeros((n, n)))
    return Ls


def discrete_instance(rng, n=None, r=2, a=3.9, min_margin=None, max_tries=500):
    """Logistic-map nodes coupled by ``r`` commuting symmetric circulant layers.

    The layers split the shift pairs of a weighted complete graph, so single
    layers are often disconnected. ``D_k = mu_k`` (m = 1) and the common
    scale minimizes the worst ``|1 - lambda|``; it is capped so that
    ``I - sum_k mu_k G_k`` stays nonnegative and row-stochastic, which keeps
    every state in [0, 1] where the Lipschitz constant ``a`` holds. With
    ``min_margin`` set, draws are repeated until the discrete criterion's
    margin exceeds it.
    """
    from .criteria import discrete_criterion

    for _ in range(max_tries):
        size = int(rng.integers(4, 8)) if n is None else n
        Ls = _split_shift_pairs(rng, size, min(r, size // 2), 0.7, 1.3)
        mus = [float(rng.uniform(0.7, 1.3)) for _ in Ls]
        total = sum(mu * L for mu, L in zip(mus, Ls))
        lam = np.linalg.eigvalsh(total)[1:]
        scale = min(2.0 / (lam.min() + lam.max()), 1.0 / np.diag(total).max())
        G_list = [scale * L for L in Ls]
        D_list = [np.array([[mu]]) for mu in mus]
        system = MultiNetworkSystem(G_list, D_list, lipschitz_c=a * a)
        inst = DiscreteInstance(system, logistic_map(a), G_list, mus, a * a)
        if min_margin is None:
            return inst
        margin = discrete_criterion(G_list, D_list, np.eye(1), a * a).margin
        if margin > min_margin:
            return inst
    raise RuntimeError("no discrete instance met the requested margin")
