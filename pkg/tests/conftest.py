import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from neumann_lens.grid import RadialDomain, build_grid

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GOLDENS = json.loads((Path(__file__).parent / "oracles" / "goldens.json").read_text())


@pytest.fixture(scope="session")
def goldens():
    return GOLDENS


@pytest.fixture(scope="session")
def interval():
    return RadialDomain(0.0, math.pi, 1)


@pytest.fixture(scope="session")
def annulus():
    """N = 4 annulus tuned to mu_1,rad = 1 (exact Bessel radius)."""
    return RadialDomain(1.0, GOLDENS["annulus_b"], 4)


@pytest.fixture(scope="session")
def annulus_grid(annulus):
    return build_grid(annulus, 2000)


@pytest.fixture(scope="session")
def interval_grid(interval):
    return build_grid(interval, 2000)


def u0_closed_form(r):
    return np.where(r <= math.pi / 2, r**2 / 2 - math.pi**2 / 8, -(r - math.pi) ** 2 / 2 + math.pi**2 / 8)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
