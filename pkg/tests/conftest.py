import numpy as np
import pytest

from polyjac import PolySystem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_poly_system(rng, n, scale=1.0, linear_only=False):
    L = scale * rng.standard_normal((n, n))
    if linear_only:
        quad = np.zeros((n, n, n))
        cubic = np.zeros((n, n, n, n))
    else:
        quad = scale * rng.standard_normal((n, n, n))
        cubic = scale * rng.standard_normal((n, n, n, n))
    F = scale * rng.standard_normal(n)
    return PolySystem(L=L, quad=quad, cubic=cubic, const=F)


def fd_jacobian(f, U, step=1e-6):
    """Central finite differences with step scaled per component."""
    U = np.asarray(U, dtype=float)
    n = U.size
    cols = []
    for j in range(n):
        h = step * (1.0 + abs(U[j]))
        up = U.copy()
        dn = U.copy()
        up[j] += h
        dn[j] -= h
        cols.append((np.asarray(f(up)) - np.asarray(f(dn))) / (2.0 * h))
    return np.stack(cols, axis=-1)


def diag_dominant_quadratic_system(rng, n, margin=2.0):
    """A quadratic system whose linear form stays diagonally dominant near 1.

    Diagonal mass is at least `margin` times the off-diagonal row mass at the
    root region, so the classical sweeps converge.
    """
    off = 0.3 * rng.standard_normal((n, n))
    np.fill_diagonal(off, 0.0)
    row_mass = np.abs(off).sum(axis=1)
    L = off + np.diag(margin * (row_mass + 1.0) + 1.0)
    quad = np.zeros((n, n, n))
    for i in range(n):
        quad[i, i, i] = 0.1 * rng.uniform(0.5, 1.0)
    F = -rng.uniform(0.5, 1.5, size=n)
    return PolySystem(L=L, quad=quad, cubic=np.zeros((n, n, n, n)), const=F)
