import numpy as np
import pytest

from muskat_lab.spectral_core import GridSpec, ScalarField


def band_field(grid, amp, kmax=4, seed=0):
    """Random real trigonometric polynomial with ``max |f| = amp``."""
    rng = np.random.default_rng(seed)
    x1, x2 = grid.coords()
    v = np.zeros(grid.shape)
    for k1 in range(-kmax, kmax + 1):
        for k2 in range(0, kmax + 1):
            if (k2 == 0 and k1 <= 0) or k1 * k1 + k2 * k2 > kmax * kmax:
                continue
            a, b = rng.standard_normal(2)
            ph = 2 * np.pi * (k1 * x1 / grid.lx + k2 * x2 / grid.ly)
            v += a * np.cos(ph) + b * np.sin(ph)
    return ScalarField(grid, amp * v / np.max(np.abs(v)))


@pytest.fixture
def grid64():
    return GridSpec(64, 64)


@pytest.fixture
def grid128():
    return GridSpec(128, 128)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE, key=lambda k: int(k[1:])):
            terminalreporter.write_line(ACCEPTANCE[key])
