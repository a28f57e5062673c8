import numpy as np
import pytest

from hopfforge.solve import predict_cycle_count
from hopfforge.transform import PerturbationOrigin, PerturbationPMinus


@pytest.fixture(scope="session")
def origin_family():
    """Benchmark origin unfolding with a single predicted cycle."""
    return PerturbationOrigin(abar0=1.0, abar2=1.0, beta0=2.0, beta2=1.0,
                              omega=2.0)


@pytest.fixture(scope="session")
def pminus_family():
    """Factory for merged-branch benchmark unfoldings."""
    def make(zeta2=-6.0, **overrides):
        base = dict(abar0=1.0, abar1=1.0, alpha2=-6.0, zeta0=-1.0,
                    zeta2=zeta2, omega=2.0)
        base.update(overrides)
        return PerturbationPMinus(**base)
    return make


@pytest.fixture(scope="session")
def origin_zero(origin_family):
    """The single averaged zero of the benchmark origin family."""
    count, zeros = predict_cycle_count(origin_family, grid_size=256, seeds=16)
    assert count == 1
    return zeros[0]


@pytest.fixture(scope="session")
def pminus_zeros_m1(pminus_family):
    """The three averaged zeros of the zeta2 = -1 benchmark, sorted."""
    count, zeros = predict_cycle_count(pminus_family(-1.0), grid_size=256,
                                       seeds=16)
    assert count == 3
    return zeros


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)
