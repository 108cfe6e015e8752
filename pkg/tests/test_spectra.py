import numpy as np
import pytest

from pdeinv.errors import UnsupportedGridError
from pdeinv.grid import Field, Grid, single_param
from pdeinv.samplers import GrfConfig, sample_grf
from pdeinv.solvers import SolverConfig, solve_ns_unforced, velocity_from_vorticity
from pdeinv.spectra import EnergySpectrum, energy_spectrum, self_consistency, spectral_distance
from pdeinv.systems import get_system

TWO_PI = 2.0 * np.pi


def kinetic_energy(w: Field) -> float:
    vel = velocity_from_vorticity(w)
    return float(0.5 * (vel.values**2).sum(axis=0).mean())


class TestEnergySpectrum:
    def test_single_mode_lands_in_its_shell(self):
        n = 64
        g = Grid.periodic_square(n, 0.0, TWO_PI)
        x, _ = g.coords()
        w = Field(grid=g, channels=("w",), values=np.sin(3 * x)[None])
        spec = energy_spectrum(w)
        others = np.delete(spec.energy, 3)
        assert spec.energy[3] > 0
        assert np.abs(others).max() < 1e-25 * spec.energy[3]

    def test_zero_field(self):
        n = 16
        g = Grid.periodic_square(n, 0.0, 1.0)
        spec = energy_spectrum(Field(grid=g, channels=("w",), values=np.zeros((1, n, n))))
        assert np.all(spec.energy == 0.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_parseval(self, seed):
        g = Grid.periodic_square(48, 0.0, 1.0)
        w = Field(grid=g, channels=("w",),
                  values=sample_grf(GrfConfig(grid=g, length_scale=0.3), seed).values)
        spec = energy_spectrum(w)
        ke = kinetic_energy(w)
        assert abs(spec.energy.sum() - ke) < 1e-10 * ke
        assert abs(spec.total_energy - ke) < 1e-10 * ke

    def test_translation_invariance(self):
        g = Grid.periodic_square(32, 0.0, 1.0)
        w = sample_grf(GrfConfig(grid=g, length_scale=0.4), 3).values[0]
        a = energy_spectrum(Field(grid=g, channels=("w",), values=w[None]))
        b = energy_spectrum(Field(grid=g, channels=("w",),
                                  values=np.roll(w, (5, 11), axis=(0, 1))[None]))
        denom = np.maximum(a.energy, 1e-30)
        assert np.abs(a.energy - b.energy).max() < 1e-10 * denom.max()

    def test_nonperiodic_rejected(self):
        g = Grid(shape=(8, 8), domain=((0.0, 1.0),) * 2, periodic=(False, False))
        with pytest.raises(UnsupportedGridError):
            energy_spectrum(Field(grid=g, channels=("w",), values=np.zeros((1, 8, 8))))

    def test_dropoff_shell_after_peak(self):
        energy = np.array([0.0, 1.0, 0.5, 1e-3, 1e-9, 1e-12])
        spec = EnergySpectrum(wavenumbers=np.arange(6), energy=energy, total_energy=1.5)
        assert spec.dropoff_shell(relative=1e-6) == 4

    def test_dropoff_never_reached(self):
        energy = np.array([0.0, 1.0, 0.9, 0.8])
        spec = EnergySpectrum(wavenumbers=np.arange(4), energy=energy, total_energy=2.7)
        assert spec.dropoff_shell(relative=1e-6) == 4


class TestSelfConsistency:
    def _reference(self, nu=2e-3, n=48):
        g = Grid.periodic_square(n, 0.0, 1.0)
        ic = Field(grid=g, channels=("w",),
                   values=sample_grf(GrfConfig(grid=g, length_scale=0.8), 6).values)
        cfg = SolverConfig(internal_resolution=(n, n), output_resolution=(n, n),
                           burn_in_s=0.0, record_interval_s=0.1, horizon_s=0.5, dt=1e-3)
        return solve_ns_unforced(ic, nu, cfg), cfg

    def test_true_parameter_reproduces(self):
        traj, cfg = self._reference()
        report = self_consistency(get_system("ns2d_unforced"), traj,
                                  single_param("nu", 2e-3), cfg)
        assert not report.diverged
        assert report.mean_distance < 1e-8

    def test_wrong_parameter_strictly_worse(self):
        traj, cfg = self._reference()
        sys_ns = get_system("ns2d_unforced")
        good = self_consistency(sys_ns, traj, single_param("nu", 2e-3), cfg)
        bad = self_consistency(sys_ns, traj, single_param("nu", 2e-2), cfg)
        assert bad.mean_distance > good.mean_distance

    def test_spectral_distance_zero_iff_equal(self):
        e = np.array([0.0, 1.0, 0.1])
        a = EnergySpectrum(wavenumbers=np.arange(3), energy=e, total_energy=1.1)
        b = EnergySpectrum(wavenumbers=np.arange(3), energy=e * 2, total_energy=2.2)
        assert spectral_distance(a, a) == 0.0
        assert spectral_distance(a, b) > 0.0
