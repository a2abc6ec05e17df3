"""Diffusion propagator, convolution, inference and kinetic estimates."""

import csv
import pathlib

import numpy as np
import pytest
from scipy.constants import physical_constants

from gemsim.core import GemsimError, TransverseField, TransverseGrid, total_power
from gemsim.modes import ModeIndex, hermite_gauss, mode_overlap
from gemsim.transport import (
    KernelResolutionError,
    apply_diffusion,
    diffuse_spectral,
    diffusion_kernel,
    infer_diffusion_coefficient,
    kinetic_diffusion_coefficient,
    longitudinal_decay_factor,
    mean_thermal_speed,
    power_retention_tem00,
)

DATA = pathlib.Path(__file__).parent / "data"
D_REF = 13.2e-4           # m^2/s
RB87_MASS = 86.909180527 * physical_constants["atomic mass constant"][0]


def load_fixture(name):
    rows = []
    with open(DATA / name, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "t_s":
                continue
            rows.append((float(row[0]), float(row[1])))
    return rows


class TestDiffusionKernel:
    def test_identity_at_zero_time(self, grid128):
        kernel = diffusion_kernel(D_REF, 0.0, grid128)
        assert kernel.is_identity
        mode = hermite_gauss(ModeIndex(0, 0), 1.5e-3, grid128)
        out = apply_diffusion(mode, D_REF, 0.0, kernel=kernel)
        assert np.array_equal(out.values, mode.values)

    def test_width_formula(self, grid256):
        # sigma_diff = sqrt(2 D t); at D = 13.2 cm^2/s and t = 10 us this
        # is 162.5 um, at t = 1 us it is 51.4 um.
        kernel = diffusion_kernel(D_REF, 10e-6, grid256)
        assert kernel.sigma == pytest.approx(np.sqrt(2 * D_REF * 10e-6))
        assert kernel.sigma == pytest.approx(1.6248e-4, rel=1e-4)
        assert np.sqrt(2 * D_REF * 1e-6) == pytest.approx(5.1381e-5, rel=1e-4)

    def test_normalized_and_symmetric(self, grid256):
        kernel = diffusion_kernel(D_REF, 20e-6, grid256)
        assert kernel.values.sum() * grid256.cell_area == pytest.approx(1.0,
                                                                        abs=1e-8)
        assert np.allclose(kernel.values, kernel.values.T, atol=1e-8)
        # centre of the padded frame sits at index n, so drop row/col 0
        # before checking point symmetry
        core = kernel.values[1:, 1:]
        assert np.allclose(core, core[::-1, ::-1], atol=1e-12)

    def test_spectrum_matches_analytic_transfer(self, grid256):
        t = 20e-6
        kernel = diffusion_kernel(D_REF, t, grid256)
        nx = 2 * grid256.nx
        kx = 2 * np.pi * np.fft.fftfreq(nx, grid256.dx)
        # compare along the kx axis up to half-Nyquist of the padded frame
        sel = np.abs(kx) <= np.pi / (2 * grid256.dx)
        expected = np.exp(-D_REF * kx[sel] ** 2 * t)
        assert np.allclose(np.abs(kernel.spectrum[0, sel]), expected, atol=1e-6)

    def test_under_resolved_rejected(self, grid256):
        # sigma below two samples (dx = 60 um)
        with pytest.raises(KernelResolutionError):
            diffusion_kernel(D_REF, 1e-6, grid256)

    def test_over_extended_rejected(self, grid256):
        with pytest.raises(KernelResolutionError):
            diffusion_kernel(D_REF, 2e-3, grid256)

    def test_negative_inputs_rejected(self, grid128):
        with pytest.raises(KernelResolutionError):
            diffusion_kernel(-1.0, 1e-6, grid128)


class TestApplyDiffusion:
    def test_amplitude_sum_conserved(self, grid256):
        mode = hermite_gauss(ModeIndex(0, 0), 1.5e-3, grid256)
        out = apply_diffusion(mode, D_REF, 30e-6)
        s_in = mode.values.sum() * grid256.cell_area
        s_out = out.values.sum() * grid256.cell_area
        assert abs(s_out - s_in) / abs(s_in) < 1e-6

    def test_tem00_variance_growth(self, grid256):
        mode = hermite_gauss(ModeIndex(0, 0), 1.5e-3, grid256)
        from gemsim.modes import intensity_moments
        t = 60e-6
        stats = intensity_moments(apply_diffusion(mode, D_REF, t))
        assert stats.var_x == pytest.approx(1.5e-3**2 / 4 + D_REF * t, rel=1e-6)

    def test_uniform_field_unchanged_in_interior(self, grid256):
        field = TransverseField(grid256, np.ones(grid256.shape))
        out = apply_diffusion(field, D_REF, 30e-6)
        interior = out.values[64:-64, 64:-64]
        assert np.allclose(interior, 1.0, atol=1e-9)

    def test_tem10_projection_drops_faster_than_tem00(self, grid256):
        t = 40e-6
        m00 = hermite_gauss(ModeIndex(0, 0), 1.5e-3, grid256)
        m10 = hermite_gauss(ModeIndex(1, 0), 1.5e-3, grid256)
        p00 = abs(mode_overlap(m00, apply_diffusion(m00, D_REF, t))) ** 2
        p10 = abs(mode_overlap(m10, apply_diffusion(m10, D_REF, t))) ** 2
        assert p10 < p00 < 1.0

    def test_semigroup_property(self, grid256):
        mode = hermite_gauss(ModeIndex(1, 0), 1.5e-3, grid256)
        once = apply_diffusion(mode, D_REF, 40e-6)
        twice = apply_diffusion(apply_diffusion(mode, D_REF, 15e-6),
                                D_REF, 25e-6)
        assert total_power(twice) == pytest.approx(total_power(once), rel=1e-6)
        assert np.max(np.abs(twice.values - once.values)) < 1e-6

    def test_spectral_path_matches_sampled_kernel(self, grid256):
        mode = hermite_gauss(ModeIndex(0, 0), 1.5e-3, grid256)
        t = 30e-6
        a = apply_diffusion(mode, D_REF, t)
        b = diffuse_spectral(mode, D_REF, t)
        assert np.max(np.abs(a.values - b.values)) < 1e-6

    def test_spectral_path_allows_tiny_steps(self, grid256):
        mode = hermite_gauss(ModeIndex(0, 0), 1.5e-3, grid256)
        out = mode
        for _ in range(8):
            out = diffuse_spectral(out, D_REF, 30e-6 / 8)
        ref = apply_diffusion(mode, D_REF, 30e-6)
        assert np.max(np.abs(out.values - ref.values)) < 1e-6


class TestPowerRetention:
    def test_trivial_points(self):
        assert power_retention_tem00(1.5e-3, D_REF, 0.0) == 1.0
        w0 = 2e-3
        t = w0**2 / (4 * D_REF)
        assert power_retention_tem00(w0, D_REF, t) == pytest.approx(0.5)

    def test_quoted_arithmetic(self):
        # 2.25e-6 / (2.25e-6 + 3.168e-7) for a 1.5 mm waist after 60 us
        value = power_retention_tem00(1.5e-3, D_REF, 60e-6)
        assert value == pytest.approx(2.25e-6 / (2.25e-6 + 3.168e-7), rel=1e-12)
        assert value == pytest.approx(0.8766, abs=5e-4)

    def test_invalid_waist(self):
        with pytest.raises(GemsimError):
            power_retention_tem00(0.0, D_REF, 1e-6)


class TestInferDiffusion:
    def test_exact_line_recovered(self):
        t = np.linspace(0, 60e-6, 11)
        s2 = 5.6e-7 + 2.4e-2 * t
        slope, intercept, diag = infer_diffusion_coefficient(list(zip(t, s2)))
        assert slope == pytest.approx(2.4e-2, rel=1e-12)
        assert intercept == pytest.approx(5.6e-7, rel=1e-10)
        assert diag["rms_residual"] < 1e-15

    def test_offset_invariance(self):
        t = np.linspace(0, 60e-6, 11)
        s2 = 5.6e-7 + 2.4e-2 * t
        s1, _, _ = infer_diffusion_coefficient(list(zip(t, s2)))
        s2b, _, _ = infer_diffusion_coefficient(list(zip(t, s2 + 1e-5)))
        assert s2b == pytest.approx(s1, rel=1e-9)

    def test_degenerate_times_rejected(self):
        with pytest.raises(GemsimError):
            infer_diffusion_coefficient([(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)])

    def test_control_off_fixture_slope(self):
        slope, _, _ = infer_diffusion_coefficient(
            load_fixture("expansion_control_off.csv"))
        assert slope * 1e4 == pytest.approx(13.2, rel=0.005)

    def test_control_on_fixture_slope(self):
        slope, _, _ = infer_diffusion_coefficient(
            load_fixture("expansion_control_on.csv"))
        assert slope * 1e4 == pytest.approx(240.0, rel=0.005)

    def test_pipeline_closure(self, grid256):
        from gemsim.modes import intensity_moments
        mode = hermite_gauss(ModeIndex(0, 0), 1.5e-3, grid256)
        series = [(0.0, intensity_moments(mode).var_mean)]
        for t in np.arange(6e-6, 61e-6, 6e-6):
            stats = intensity_moments(apply_diffusion(mode, D_REF, t))
            series.append((t, stats.var_mean))
        slope, _, _ = infer_diffusion_coefficient(series)
        assert slope == pytest.approx(D_REF, rel=0.02)


class TestKineticTheory:
    def test_mean_speed_rb87_at_343k(self):
        assert mean_thermal_speed(343.0, RB87_MASS) == pytest.approx(289.0,
                                                                     rel=0.005)

    def test_quoted_diffusion_estimate(self):
        d = kinetic_diffusion_coefficient(343.0, RB87_MASS, 17e6 * 0.5)
        assert d * 1e4 == pytest.approx(31.0, rel=0.10)

    def test_inverse_collision_scaling(self):
        d1 = kinetic_diffusion_coefficient(343.0, RB87_MASS, 8.5e6)
        d2 = kinetic_diffusion_coefficient(343.0, RB87_MASS, 17e6)
        assert d1 == pytest.approx(2 * d2, rel=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(GemsimError):
            kinetic_diffusion_coefficient(0.0, RB87_MASS, 1e6)


class TestLongitudinalDecay:
    def test_trivial_cases(self):
        assert longitudinal_decay_factor(0.0, 1e7, 60e-6) == 1.0
        assert longitudinal_decay_factor(D_REF, 1e7, 0.0) == 1.0

    def test_super_exponential(self):
        eta = 2 * np.pi * 1e7
        tau = 30e-6
        f0 = 1.0
        f1 = longitudinal_decay_factor(D_REF, eta, tau)
        f2 = longitudinal_decay_factor(D_REF, eta, 2 * tau)
        assert f2 / f1 < f1 / f0

    def test_formula(self):
        eta, tau = 6.0e7, 40e-6
        expected = np.exp(-D_REF * eta**2 * tau**3 / 3)
        assert longitudinal_decay_factor(D_REF, eta, tau) == pytest.approx(
            expected, rel=1e-12)

    def test_visible_curvature_over_storage_range(self):
        # log-efficiency vs tau is visibly non-linear over 60 us
        eta = 2 * np.pi * 1e7
        taus = np.array([20e-6, 40e-6, 60e-6])
        logs = np.log([longitudinal_decay_factor(D_REF, eta, t) ** 2
                       for t in taus])
        first, second = logs[1] - logs[0], logs[2] - logs[1]
        assert second < first * 2    # far from linear (would be equal steps)
