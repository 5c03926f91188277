import numpy as np
import pytest

import mchwave as mw


@pytest.fixture(scope="session")
def wave05():
    """The workhorse wave at (k, L) = (0.5, 6 pi)."""
    return mw.wave_params(0.5, 6.0 * np.pi)


def assemble_for(p: mw.WaveParams, n: int) -> mw.OperatorMatrix:
    grid = mw.PeriodicGrid(p.L, n)
    phi, _, phi2 = mw.profile(p, grid.nodes)
    return mw.assemble_l(mw.PeriodicField(grid, phi), mw.PeriodicField(grid, phi2), p.c)


@pytest.fixture(scope="session")
def op05_256(wave05):
    return assemble_for(wave05, 256)


@pytest.fixture(scope="session")
def op05_512(wave05):
    return assemble_for(wave05, 512)


@pytest.fixture(scope="session")
def op_constant_128():
    p = mw.constant_wave(2.0 * np.pi)
    return assemble_for(p, 128)


def random_smooth(grid: mw.PeriodicGrid, rng: np.random.Generator,
                  modes: int = 6) -> mw.PeriodicField:
    """Zero-mean band-limited random field for perturbation tests."""
    vals = np.zeros(grid.n)
    x = grid.nodes
    for m in range(1, modes + 1):
        arg = 2.0 * np.pi * m * x / grid.L
        vals += rng.normal() * np.cos(arg) + rng.normal() * np.sin(arg)
    return mw.PeriodicField(grid, vals)
