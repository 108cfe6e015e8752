import numpy as np
import pytest

from pdeinv.errors import InvalidConfigError
from pdeinv.grid import Field, Grid
from pdeinv.metrics import rel_l2
from pdeinv.samplers import KdvIcConfig, sample_kdv_ic
from pdeinv.solvers import SolverConfig, solve_kdv
from pdeinv.solvers.kdv import soliton


def cfg(n=256, burn=0.0, cad=0.25, horizon=1.0):
    return SolverConfig(internal_resolution=(n,), output_resolution=(n,),
                        burn_in_s=burn, record_interval_s=cad, horizon_s=horizon,
                        dt=None, rtol=1e-9, atol=1e-9)


GRID = Grid.periodic_line(256, 128.0)


def spectral_residual_of_travelling_wave(u, c, delta, grid):
    """Substitute u(x - c t) into the dispersive equation with spectral
    derivatives; exact solutions give ~0."""
    n = grid.shape[0]
    k = 2 * np.pi * np.fft.rfftfreq(n, d=1.0 / n) / grid.lengths[0]
    uh = np.fft.rfft(u)
    ux = np.fft.irfft(1j * k * uh, n=n)
    uxxx = np.fft.irfft((1j * k) ** 3 * uh, n=n)
    return -c * ux + u * ux + delta**2 * uxxx


class TestSolveKdv:
    def test_zero_ic_stays_zero(self):
        ic = Field(grid=GRID, channels=("u",), values=np.zeros((1, 256)))
        traj = solve_kdv(ic, 1.0, cfg())
        assert np.all(traj.values == 0.0)

    def test_soliton_is_exact_before_use(self):
        c, delta = 1.0, 2.0
        f = soliton(GRID, c, delta, x0=40.0)
        res = spectral_residual_of_travelling_wave(f.values[0], c, delta, GRID)
        assert np.abs(res).max() < 1e-5 * np.abs(f.values).max()

    def test_soliton_translates(self):
        c, delta = 1.0, 2.0
        f = soliton(GRID, c, delta, x0=40.0)
        traj = solve_kdv(f, delta, cfg(horizon=1.0))
        for i, t in enumerate(traj.times):
            ref = soliton(GRID, c, delta, x0=40.0 + c * t).values[0]
            assert rel_l2(traj.values[i, 0], ref) < 0.02

    def test_mass_conserved(self):
        ic = sample_kdv_ic(KdvIcConfig(grid=GRID), seed=5)
        traj = solve_kdv(ic, 2.0, cfg(burn=2.0, cad=0.5, horizon=8.0))
        masses = traj.values[:, 0].mean(axis=1)
        scale = np.abs(traj.values).mean()
        assert np.abs(masses - masses[0]).max() < 1e-6 * scale

    def test_deterministic(self):
        ic = sample_kdv_ic(KdvIcConfig(grid=GRID), seed=5)
        a = solve_kdv(ic, 1.5, cfg(horizon=0.5)).values
        b = solve_kdv(ic, 1.5, cfg(horizon=0.5)).values
        assert np.array_equal(a, b)

    def test_invalid_delta(self):
        ic = Field(grid=GRID, channels=("u",), values=np.zeros((1, 256)))
        with pytest.raises(InvalidConfigError):
            solve_kdv(ic, 0.0, cfg())

    def test_2d_ic_rejected(self):
        g = Grid.periodic_square(8, 0.0, 1.0)
        ic = Field(grid=g, channels=("u",), values=np.zeros((1, 8, 8)))
        with pytest.raises(InvalidConfigError):
            solve_kdv(ic, 1.0, cfg(8))
