import numpy as np
import pytest
from hypothesis import settings

from curvebound.potential_measure import (
    build_grid_measure,
    curvature_stats,
    make_cosine_perturbed_gaussian,
    make_gaussian,
    make_quartic,
)

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def gaussian_problem():
    p = make_gaussian(1.0, dim=1, domain_box=((-8.0, 8.0),))
    m = build_grid_measure(p, 1024)
    s = curvature_stats(m, p)
    return p, m, s


@pytest.fixture(scope="session")
def cosine_problem():
    p = make_cosine_perturbed_gaussian(0.1, 2.0, domain_box=((-8.0, 8.0),))
    m = build_grid_measure(p, 2048)
    s = curvature_stats(m, p)
    return p, m, s


@pytest.fixture(scope="session")
def quartic_problem():
    p = make_quartic()
    m = build_grid_measure(p, 1024)
    s = curvature_stats(m, p)
    return p, m, s


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260816)
