import numpy as np
import pytest

from chargedosc.params import PhysicalSystem

CRITERIA = []


def random_generic(rng, n):
    out = []
    for _ in range(n):
        out.append(PhysicalSystem(
            mass=rng.uniform(0.3, 3.0), charge=rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0),
            omega_x=rng.uniform(0.1, 3.0), omega_y=rng.uniform(0.1, 3.0), omega_z=rng.uniform(0.1, 3.0),
            B_z=rng.uniform(-3.0, 3.0), E_x=rng.uniform(-1, 1), E_y=rng.uniform(-1, 1)))
    return out


def random_tilted(rng, n):
    out = []
    for _ in range(n):
        out.append(PhysicalSystem(
            mass=rng.uniform(0.3, 3.0), charge=rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0),
            omega_x=rng.uniform(0.1, 3.0), omega_y=rng.uniform(0.1, 3.0), omega_z=0.0,
            B_z=rng.uniform(-3.0, 3.0), B_x=rng.uniform(0.1, 3.0) * rng.choice([-1.0, 1.0]),
            E_x=rng.uniform(-1, 1), E_y=rng.uniform(-1, 1)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
