import numpy as np
import pytest

import schauderpath as sp


@pytest.fixture(scope="session")
def dyadic10():
    return sp.build_dyadic(1.0, 10)


@pytest.fixture(scope="session")
def basis10(dyadic10):
    return sp.enumerate_supports(dyadic10, 9)


@pytest.fixture(scope="session")
def shifted10():
    return sp.build_shifted_binary(1.0, 10, 2.5)


@pytest.fixture(scope="session")
def shifted_basis10(shifted10):
    return sp.enumerate_supports(shifted10, 9)


@pytest.fixture(scope="session")
def ternary_seq():
    """Custom 3-ary refinement: every interval split at its thirds."""
    levels = [[0.0, 1.0]]
    for _ in range(4):
        pts = levels[-1]
        new = []
        for a, b in zip(pts[:-1], pts[1:]):
            new += [a, a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0]
        new.append(pts[-1])
        levels.append(new)
    return sp.from_levels(1.0, levels, kind="custom")


@pytest.fixture(scope="session")
def dyadic12():
    return sp.build_dyadic(1.0, 12)


@pytest.fixture(scope="session")
def basis12(dyadic12):
    return sp.enumerate_supports(dyadic12, 11)


@pytest.fixture(scope="session")
def cov12_h25(basis12):
    """Endpoint-extended coefficient covariance, H = 0.25, depth 12."""
    return sp.assemble_covariance(basis12, 0.25, include_endpoint=True)


@pytest.fixture(scope="session")
def cov12_h75(basis12):
    return sp.assemble_covariance(basis12, 0.75, include_endpoint=True)


def haar_inner_product(basis, idx_a, idx_b):
    """Exact integral of psi_a psi_b by midpoint quadrature on the union grid.

    Both factors are piecewise constant between consecutive points of the
    level-(max+1) grid, so the midpoint rule is exact.  Kept independent
    of the production evaluation path on purpose.
    """
    grid = basis.grid
    mids = 0.5 * (grid[:-1] + grid[1:])
    w = np.diff(grid)
    fa = sp.eval_haar(basis, idx_a, mids)
    fb = sp.eval_haar(basis, idx_b, mids)
    return float(np.sum(fa * fb * w))
