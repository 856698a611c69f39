import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from saddlemg.experiments import elasticity_symbols, projector
from saddlemg.symbol import TrigPoly

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SQRT2 = math.sqrt(2.0)


@pytest.fixture
def elast():
    """Elasticity symbols at ρ = 1/2."""
    return elasticity_symbols(0.5)


@pytest.fixture
def p_full():
    return projector("full")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_poly(rng, degree, real=True, scale=1.0):
    """Random trigonometric polynomial; ``real`` makes it real-valued."""
    c = rng.standard_normal(2 * degree + 1) * scale
    if not real:
        c = c + 1j * rng.standard_normal(2 * degree + 1) * scale
        return TrigPoly(c)
    d = {j: c[degree + j] for j in range(0, degree + 1)}
    full = {}
    for j, v in d.items():
        full[j] = v
        full[-j] = v
    return TrigPoly.from_dict(full)


def dense_circulant(coeffs: dict, n: int) -> np.ndarray:
    """Entry (i, k) = Σ a_j over j ≡ i - k (mod n), built entry by entry."""
    M = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for k in range(n):
            for j, a in coeffs.items():
                if (i - k - j) % n == 0:
                    M[i, k] += a
    return M


def dense_toeplitz(coeffs: dict, n: int) -> np.ndarray:
    M = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for k in range(n):
            M[i, k] = coeffs.get(i - k, 0.0)
    return M


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance lines collected by ``test_acceptance``."""
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not (mod.RESULTS or mod.INFO):
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
    for line in mod.INFO:
        terminalreporter.write_line(line)
