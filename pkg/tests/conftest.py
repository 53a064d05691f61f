import itertools

import numpy as np
import pytest

from fermikin import LatticeContext, Potential
from fermikin.states import Distribution


def box(d, B):
    return list(itertools.product(range(-B, B + 1), repeat=d))


def random_sparse(ctx, size, seed, spread=2):
    """Clustered random occupations straddling the Fermi sphere."""
    rng = np.random.default_rng(seed)
    center = rng.normal(size=ctx.d)
    center = np.rint(center / np.linalg.norm(center) * ctx.p_F).astype(int)
    values = {}
    while len(values) < size:
        p = tuple(int(c) for c in center + rng.integers(-spread, spread + 1, ctx.d))
        values[p] = float(rng.uniform(0.05, 0.95))
    return Distribution(ctx.d, values)


@pytest.fixture
def small():
    return LatticeContext(3, 4.0, 1), Potential.indicator(3, 1)
