import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from multisync.instances import random_circulant_family

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# the three 5-node Laplacians of the worked example, typed in independently
G1_LITERAL = np.array([
    [1, 0, -1, 0, 0],
    [0, 2, 0, -1, -1],
    [-1, 0, 3, -1, -1],
    [-1, -1, 0, 3, -1],
    [0, 0, 0, -1, 1],
], dtype=float)
G2_LITERAL = np.array([
    [2, -1, 0, 0, -1],
    [0, 1, 0, -1, 0],
    [0, 0, 2, -1, -1],
    [-1, 0, 0, 1, 0],
    [-1, 0, -1, -1, 3],
], dtype=float)
G3_LITERAL = np.array([
    [1, -1, 0, 0, 0],
    [-1, 2, -1, 0, 0],
    [0, -1, 1, 0, 0],
    [0, 0, -1, 1, 0],
    [-1, -1, -1, 0, 3],
], dtype=float)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def faddeev_leverrier(A):
    """Exact characteristic polynomial coefficients (highest degree first)
    of an integer matrix, using rational arithmetic."""
    from fractions import Fraction

    n = len(A)
    A = [[Fraction(int(x)) for x in row] for row in A]
    M = [[Fraction(0)] * n for _ in range(n)]
    coeffs = [Fraction(1)]
    for k in range(1, n + 1):
        AM = [[sum(A[i][l] * M[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        M = [[AM[i][j] + (coeffs[-1] if i == j else 0) for j in range(n)] for i in range(n)]
        AM = [[sum(A[i][l] * M[l][j] for l in range(n)) for j in range(n)] for i in range(n)]
        coeffs.append(-sum(AM[i][i] for i in range(n)) / k)
    return coeffs


def poly_roots(coeffs):
    import mpmath

    roots = mpmath.polyroots([float(c) for c in coeffs], maxsteps=200, extraprec=200)
    return [complex(z) for z in roots]


def multiset_close(a, b, tol):
    """Greedy matching of two complex multisets."""
    a = list(np.asarray(a, dtype=complex).ravel())
    b = list(np.asarray(b, dtype=complex).ravel())
    if len(a) != len(b):
        return False
    for z in a:
        d = [abs(z - w) for w in b]
        k = int(np.argmin(d))
        if d[k] > tol:
            return False
        b.pop(k)
    return True


def random_commuting(rng, n, r):
    """A random commuting family of one of three kinds."""
    kind = rng.integers(3)
    if kind == 0:
        composite = any(n % d == 0 for d in range(2, n))
        return random_circulant_family(rng, n, r, connected=not composite or bool(rng.integers(2)))
    if kind == 1:
        A = rng.standard_normal((n, n))
        return [sum(c * np.linalg.matrix_power(A, k) for k, c in enumerate(rng.standard_normal(3)))
                for _ in range(r)]
    V = rng.standard_normal((n, n)) + 2 * np.eye(n)
    Vinv = np.linalg.inv(V)
    return [V @ np.diag(rng.standard_normal(n)) @ Vinv for _ in range(r)]
