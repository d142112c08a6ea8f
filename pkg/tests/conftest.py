import numpy as np
import pytest

from snnevo.genome import random_genome
from snnevo.substrate import FeatureFlags, MicroParams, Network

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_case(rng: np.random.Generator, max_n: int = 16, max_ticks: int = 200):
    """A random network (decoded from a random genome) plus an injection sequence."""
    n = int(rng.integers(2, max_n + 1))
    n_in = int(rng.integers(1, n + 1))
    g = random_genome(rng, n)
    micro = g.micro_params()
    ticks = int(rng.integers(1, max_ticks + 1))
    # drive hard enough that most networks actually spike
    injections = rng.uniform(0.0, 2.5 * micro.threshold, size=(ticks, n_in))
    weights = g.weight_genes.reshape(n, n) * rng.uniform(0.5, 3.0)
    return weights, micro, n_in, injections


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def plain_micro():
    return MicroParams(
        threshold=1.0,
        decay=0.5,
        v_reset=0.0,
        refractory_period=0,
        stdp_a_plus=0.1,
        stdp_a_minus=0.1,
        stdp_tau=2.0,
        learning_rate=1.0,
        w_max=4.0,
        flags=FeatureFlags(stdp_enabled=True, refractory_enabled=False, symmetric_stdp=False),
    )


@pytest.fixture
def make_net():
    def make(weights, micro, n_in=1, n_out=0):
        return Network(np.asarray(weights, dtype=float), micro, n_in, n_out)

    return make
