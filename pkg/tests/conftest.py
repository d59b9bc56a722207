import time

import numpy as np
import pytest

from spinpair import NoiseParams


def pytest_configure(config):
    config._suite_start = time.perf_counter()


def pytest_collection_modifyitems(items):
    # Acceptance criteria run last so the suite-runtime criterion sees the
    # whole run (stable sort keeps the original order otherwise).
    items.sort(key=lambda item: item.path.name == "test_acceptance.py")


@pytest.fixture
def suite_start(request):
    return request.config._suite_start


def random_density_matrix(rng, dim=4):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / rho.trace().real


def random_cp_params(rng, rate_scale=3.0):
    """NoiseParams sampled inside the strictly completely positive region
    (dephasing rate matrix positive semidefinite)."""
    gamma1 = rng.uniform(0.05, 1.0) * rate_scale
    gamma2 = rng.uniform(0.05, 1.0) * rate_scale
    gamma3 = rng.uniform(-0.95, 0.95) * 2.0 * np.sqrt(gamma1 * gamma2)
    return NoiseParams(
        gamma1=gamma1,
        gamma2=gamma2,
        gamma3=gamma3,
        Gamma1=rng.uniform(0.0, 1.0),
        Gamma2=rng.uniform(0.0, 1.0),
    )
