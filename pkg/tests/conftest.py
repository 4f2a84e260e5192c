import numpy as np
import pytest

from gsmooth.spaces import build_complex, build_gsmooth_space, make_geometry


@pytest.fixture(scope="session")
def cap_factory():
    """Session-cached cap spaces keyed by (n, k, bidegree); geometry set.

    The returned spaces are shared across tests: treat them as read-only.
    """
    cache = {}

    def get(n, k=1, bidegree=(3, 3)):
        key = (n, k, bidegree)
        if key not in cache:
            complex_ = build_complex(n, bidegree)
            space = build_gsmooth_space(complex_, k)
            make_geometry(space)
            cache[key] = space
        return cache[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
