"""Shared fixtures.

The expensive artifacts (default-resolution series, 16384-vertex domains,
the h=1e-4 Euler runs) are session-scoped so the acceptance module and the
property tests share one computation.
"""

import numpy as np
import pytest

import skembed as sk
from skembed.geometry import DomainModel, build_curve
from skembed.harmonic import analyze
from skembed.montecarlo import RngStream, euler_exit_samples, exact_exit_samples


@pytest.fixture(scope="session")
def uniform_spec():
    return sk.uniform_spec(1.0)


@pytest.fixture(scope="session")
def uniform_phi(uniform_spec):
    return sk.fold_to_boundary(uniform_spec)


@pytest.fixture(scope="session")
def uniform_series(uniform_phi):
    return analyze(uniform_phi)  # default n_coeffs=2048, grid_size=65536


@pytest.fixture(scope="session")
def uniform_domain(uniform_series):
    return DomainModel.from_curve(build_curve(uniform_series, 16384))


@pytest.fixture(scope="session")
def heavy_spec():
    return sk.heavy_tail_spec()


@pytest.fixture(scope="session")
def heavy_phi(heavy_spec):
    return sk.fold_to_boundary(heavy_spec)


@pytest.fixture(scope="session")
def heavy_series(heavy_phi):
    return analyze(heavy_phi)


@pytest.fixture(scope="session")
def cos_phi():
    return sk.BoundaryFunction(func=np.cos, even_symmetric=True, label="cos")


@pytest.fixture(scope="session")
def cos_series(cos_phi):
    return analyze(cos_phi, n_coeffs=64, grid_size=1024)


@pytest.fixture(scope="session")
def disc_domain(cos_phi):
    series = analyze(cos_phi, n_coeffs=256, grid_size=4096)
    return DomainModel.from_curve(build_curve(series, 16384))


@pytest.fixture(scope="session")
def uniform_exact_100k(uniform_series):
    return exact_exit_samples(uniform_series, 100_000, RngStream(2024, 0))


@pytest.fixture(scope="session")
def uniform_euler_h4(uniform_domain):
    """h = 1e-4 Euler run on the uniform domain, n = 1e4 paths."""
    return euler_exit_samples(uniform_domain, 1e-4, 10_000, RngStream(2024, 1))


@pytest.fixture(scope="session")
def disc_euler_h4(disc_domain):
    """h = 1e-4 Euler run on the unit disc, n = 1e4 paths."""
    return euler_exit_samples(disc_domain, 1e-4, 10_000, RngStream(2024, 2))
