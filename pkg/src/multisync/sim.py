"""Simulation of coupled networks and synchronization diagnostics.

Continuous time uses fixed-step RK4 on
``xdot = (f(x_1), ..., f(x_n)) - K(t) x`` with ``K = sum_k G_k (x) D_k``.
Discrete time iterates ``x(p+1) = (I - K(p)) F(x(p)) + u(p)`` exactly.
States are stacked node-major: node i occupies entries ``i*m .. i*m+m-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .criteria import MultiNetworkSystem
from .errors import DivergenceError, ValidationError
from .matrixcore import as_square, eig_sym, sym

__all__ = [
    "NodeDynamics",
    "affine",
    "lorenz",
    "logistic_map",
    "tabulated",
    "custom",
    "TrajectoryTrace",
    "SyncReport",
    "simulate_ct",
    "simulate_dt",
    "sync_error",
    "required_feedback",
    "initial_states",
]

BLOWUP = 1e9
DEFAULT_DT = 1e-3
SYNC_THRESHOLD = 1e-6

# box containing the Lorenz attractor for the classical parameters
LORENZ_BOX = ((-25.0, 25.0), (-35.0, 35.0), (0.0, 60.0))


@dataclass(frozen=True, eq=False)
class NodeDynamics:
    """Vector field or map applied row-wise to an ``(n, m)`` state array.

    ``jacobian`` together with ``jacobian_points`` lets
    :func:`required_feedback` bound the symmetric Jacobian. The bound is
    exact for affine fields and a box estimate otherwise. ``lipschitz``
    is the global Lipschitz constant of a map (``sqrt(c)`` in the discrete
    criterion) where one is known.
    """

    kind: str
    m: int
    func: Callable
    params: dict = field(default_factory=dict)
    jacobian: Callable | None = None
    jacobian_points: np.ndarray | None = None
    lipschitz: float | None = None
    note: str = ""

    def __call__(self, X, t=0.0):
        return self.func(X, t)


def affine(A, b=None) -> NodeDynamics:
    A = as_square(A, "A")
    m = A.shape[0]
    b = np.zeros(m) if b is None else np.asarray(b, dtype=float).reshape(m)
    return NodeDynamics(
        "affine", m, lambda X, t: X @ A.T + b, {"A": A, "b": b},
        jacobian=lambda w: A, jacobian_points=np.zeros((1, m)),
        lipschitz=float(np.linalg.norm(A, 2)),
        note="symmetric Jacobian bound is exact",
    )


def lorenz(sigma=10.0, rho=28.0, beta=8.0 / 3.0) -> NodeDynamics:
    def f(X, t):
        x, y, z = X[:, 0], X[:, 1], X[:, 2]
        return np.stack([sigma * (y - x), x * (rho - z) - y, x * y - beta * z], axis=1)

    def jac(w):
        x, y, z = w
        return np.array([[-sigma, sigma, 0.0], [rho - z, -1.0, -x], [y, x, -beta]])

    corners = np.array(np.meshgrid(*LORENZ_BOX, indexing="ij")).reshape(3, -1).T
    return NodeDynamics(
        "lorenz", 3, f, {"sigma": sigma, "rho": rho, "beta": beta},
        jacobian=jac, jacobian_points=corners,
        note=f"Jacobian bound is an estimate valid on the box {LORENZ_BOX}",
    )


def logistic_map(a=3.9) -> NodeDynamics:
    """``x -> a x (1 - x)`` on [0, 1]; Lipschitz constant ``a`` there (c = a^2)."""
    return NodeDynamics(
        "logistic_map", 1, lambda X, t: a * X * (1.0 - X), {"a": a},
        lipschitz=float(a), note="Lipschitz constant valid on [0, 1]",
    )


def tabulated(xs, ys) -> NodeDynamics:
    """Scalar map given by linear interpolation of a table (clamped ends)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2 or np.any(np.diff(xs) <= 0):
        raise ValidationError("table needs increasing xs and matching ys")
    slope = float(np.abs(np.diff(ys) / np.diff(xs)).max())
    return NodeDynamics(
        "tabulated", 1, lambda X, t: np.interp(X, xs, ys), {"xs": xs, "ys": ys},
        lipschitz=slope,
    )


def custom(func, m, lipschitz=None, note="") -> NodeDynamics:
    """Wrap ``func(X, t)`` acting on ``(n, m)`` arrays."""
    return NodeDynamics("custom", int(m), func, lipschitz=lipschitz, note=note)


def required_feedback(f: NodeDynamics, D_sum, c=1.0, V=None, hi=1e6) -> float:
    """Smallest ``xi`` with ``sym(V (J - xi D_sum)) <= -c I`` at every Jacobian
    sample point.

    The largest eigenvalue of a symmetric matrix is convex in its entries, so
    for Jacobians affine in the state (affine, Lorenz) checking the corners
    of a box bounds the whole box.
    """
    if f.jacobian is None:
        raise ValidationError(f"{f.kind} dynamics have no Jacobian model")
    D_sum = as_square(D_sum, "D_sum")
    V = np.eye(f.m) if V is None else as_square(V, "V")
    mats = [V @ f.jacobian(w) for w in f.jacobian_points]
    VD = V @ D_sum

    def worst(xi):
        return max(eig_sym(sym(J - xi * VD))[-1] for J in mats)

    if worst(0.0) <= -c:
        return 0.0
    if worst(hi) > -c:
        raise ValidationError("D_sum cannot stabilize these dynamics")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if worst(mid) <= -c:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return hi


@dataclass
class TrajectoryTrace:
    times: np.ndarray
    states: np.ndarray
    n: int
    m: int
    inputs: np.ndarray | None = None
    discrete: bool = False

    def node_states(self) -> np.ndarray:
        """States reshaped to ``(samples, n, m)``."""
        return self.states.reshape(len(self.times), self.n, self.m)

    def rows(self):
        """Long-format rows ``(t, node, component, value)``."""
        X = self.node_states()
        for k, t in enumerate(self.times):
            for i in range(self.n):
                for j in range(self.m):
                    yield t, i, j, X[k, i, j]


@dataclass
class SyncReport:
    error_series: np.ndarray
    final_error: float
    decay_rate: float
    decay_ratio: float
    synchronized: bool
    threshold: float


def _mode_at(sys, index, steps_per_mode):
    count = len(sys.all_modes())
    if count == 1:
        return 0
    return int(index // steps_per_mode) % count


def _check_x0(sys, x0):
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.size != sys.n * sys.m:
        raise ValidationError(f"x0 must have n*m = {sys.n * sys.m} entries, got {x.size}")
    return x.copy()


def _guard(x, step):
    if not np.all(np.isfinite(x)) or np.abs(x).max() > BLOWUP:
        raise DivergenceError(f"state diverged at step {step}", step=step)


def simulate_ct(sys: MultiNetworkSystem, f: NodeDynamics, x0, dt=DEFAULT_DT, T=10.0,
                record_every=1) -> TrajectoryTrace:
    """Fixed-step RK4. With switching modes the coupling is held constant over
    each step and changes every ``round(sys.dwell / dt)`` steps."""
    if dt <= 0 or T < dt:
        raise ValidationError("need dt > 0 and T >= dt")
    if f.m != sys.m:
        raise ValidationError(f"dynamics have m={f.m}, system has m={sys.m}")
    n, m = sys.n, sys.m
    x = _check_x0(sys, x0)
    steps = int(round(T / dt))
    per_mode = max(1, int(round(sys.dwell / dt)))
    Ks = [sys.coupling(k) for k in range(len(sys.all_modes()))]

    def rhs(t, y, K):
        return f(y.reshape(n, m), t).reshape(-1) - K @ y

    times, states = [0.0], [x.copy()]
    for k in range(steps):
        t = k * dt
        K = Ks[_mode_at(sys, k, per_mode)]
        k1 = rhs(t, x, K)
        k2 = rhs(t + dt / 2, x + dt / 2 * k1, K)
        k3 = rhs(t + dt / 2, x + dt / 2 * k2, K)
        k4 = rhs(t + dt, x + dt * k3, K)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        _guard(x, k + 1)
        if (k + 1) % record_every == 0 or k + 1 == steps:
            times.append((k + 1) * dt)
            states.append(x.copy())
    return TrajectoryTrace(np.array(times), np.array(states), n, m)


def simulate_dt(sys: MultiNetworkSystem, f: NodeDynamics, x0, steps: int,
                u=None) -> TrajectoryTrace:
    """Iterate ``x(p+1) = (I - K(p)) F(x(p), p) + u(p)``.

    ``u`` may be ``None``, an array of shape ``(steps, n*m)`` or a callable
    ``u(p)``. Mode switching happens every ``int(sys.dwell)`` steps.
    """
    if f.m != sys.m:
        raise ValidationError(f"dynamics have m={f.m}, system has m={sys.m}")
    n, m = sys.n, sys.m
    x = _check_x0(sys, x0)
    N = n * m
    Ws = [np.eye(N) - sys.coupling(k) for k in range(len(sys.all_modes()))]
    per_mode = max(1, int(sys.dwell))
    if u is None:
        inputs = None
    elif callable(u):
        inputs = np.array([np.asarray(u(p), dtype=float).reshape(N) for p in range(steps)])
    else:
        inputs = np.asarray(u, dtype=float).reshape(steps, N)
    states = np.empty((steps + 1, N))
    states[0] = x
    for p in range(steps):
        x = Ws[_mode_at(sys, p, per_mode)] @ f(x.reshape(n, m), p).reshape(-1)
        if inputs is not None:
            x = x + inputs[p]
        _guard(x, p + 1)
        states[p + 1] = x
    return TrajectoryTrace(np.arange(steps + 1, dtype=float), states, n, m, inputs, True)


def sync_error(trace: TrajectoryTrace, n=None, m=None, threshold=SYNC_THRESHOLD) -> SyncReport:
    """Largest pairwise node distance per sample, plus an exponential fit.

    The fit is a least-squares line through ``log(error)`` over the second
    half of the samples recorded before the error first reaches the
    round-off floor, so a run that syncs to machine precision still gets a
    meaningful rate. ``decay_rate`` is per unit time (per step for discrete
    traces), and ``decay_ratio = exp(decay_rate)``.
    """
    n = trace.n if n is None else n
    m = trace.m if m is None else m
    X = trace.states.reshape(len(trace.times), n, m)
    diff = X[:, :, None, :] - X[:, None, :, :]
    err = np.sqrt((diff**2).sum(axis=-1)).max(axis=(1, 2))
    floor = 1e-12 * (1.0 + np.abs(X).max())
    below = np.flatnonzero(err <= floor)
    end = below[0] if below.size else len(err)
    start = end // 2
    t, e = trace.times[start:end], err[start:end]
    if len(t) >= 2 and np.ptp(t) > 0:
        rate = float(np.polyfit(t, np.log(e), 1)[0])
    else:
        rate = float("-inf") if below.size else 0.0
    final = float(err[-1])
    return SyncReport(err, final, rate, float(np.exp(rate)), final <= threshold, threshold)


def initial_states(n, m, center, spread=0.1, seed=0) -> np.ndarray:
    """``n`` copies of ``center`` plus uniform perturbations in ``[-spread, spread]``."""
    rng = np.random.default_rng(seed)
    center = np.broadcast_to(np.asarray(center, dtype=float), (m,))
    return (center[None, :] + rng.uniform(-spread, spread, size=(n, m))).reshape(-1)
