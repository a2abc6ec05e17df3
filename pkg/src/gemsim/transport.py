"""Atomic diffusion of the stored coherence.

Transverse Brownian transport is modelled by convolving the coherence with
a Gaussian propagator of width sigma_diff = sqrt(2 D t).  The convolution
is carried out spectrally on a grid zero-padded to twice the extent per
axis, so the propagator is non-periodic: amplitude that spreads past the
frame is lost, not wrapped.

Convention: field-amplitude convolution with sigma_diff^2 = 2 D t makes
the *intensity* variance of a Gaussian beam grow exactly as D*t, so the
slope of the measured sigma^2(t) line is the diffusion coefficient itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.constants import k as k_boltzmann

from .core import GemsimError, TransverseField, TransverseGrid


class KernelResolutionError(GemsimError):
    """Propagator cannot be represented on the grid."""


def _padded_displacements(grid: TransverseGrid):
    """Displacement coordinates of the 2x zero-padded frame."""
    npx, npy = 2 * grid.nx, 2 * grid.ny
    ux = (np.arange(npx) - npx / 2.0) * grid.dx
    uy = (np.arange(npy) - npy / 2.0) * grid.dy
    return np.meshgrid(ux, uy)


@dataclass(frozen=True)
class DiffusionKernel:
    """Gaussian propagator sampled on the padded frame of a grid."""

    grid: TransverseGrid
    diffusion: float
    t: float
    sigma: float
    values: np.ndarray = field(repr=False)     # padded, centred
    spectrum: np.ndarray = field(repr=False)   # padded, FFT order, DC = 1

    @property
    def is_identity(self):
        return self.sigma == 0.0


def diffusion_kernel(diffusion, t, grid: TransverseGrid) -> DiffusionKernel:
    """Build the propagator G(r, t) = (4 pi D t)^-1 exp(-r.r / (2 sigma^2)).

    The sampled kernel is renormalized to unit integral so convolution
    conserves total complex amplitude.  Guards reject kernels narrower
    than two samples (unresolvable) or wider than an eighth of the grid
    extent (padding no longer isolates the frame).
    """
    if diffusion < 0 or t < 0:
        raise KernelResolutionError("diffusion coefficient and time must be non-negative")
    sigma = np.sqrt(2.0 * diffusion * t)
    npx, npy = 2 * grid.nx, 2 * grid.ny
    if sigma == 0.0:
        values = np.zeros((npy, npx))
        values[npy // 2, npx // 2] = 1.0 / grid.cell_area
        spectrum = np.ones((npy, npx))
        return DiffusionKernel(grid, diffusion, t, 0.0, values, spectrum)

    if sigma < 2.0 * max(grid.dx, grid.dy):
        raise KernelResolutionError(
            f"sigma_diff = {sigma:.3g} m under-resolved: below 2 samples "
            f"({2 * max(grid.dx, grid.dy):.3g} m)"
        )
    if sigma > min(grid.extent_x, grid.extent_y) / 8.0:
        raise KernelResolutionError(
            f"sigma_diff = {sigma:.3g} m exceeds extent/8 "
            f"({min(grid.extent_x, grid.extent_y) / 8.0:.3g} m); grid too small"
        )

    ux, uy = _padded_displacements(grid)
    values = np.exp(-(ux**2 + uy**2) / (2.0 * sigma**2))
    values /= values.sum() * grid.cell_area
    spectrum = np.fft.fft2(np.fft.ifftshift(values)) * grid.cell_area
    return DiffusionKernel(grid, diffusion, t, sigma, values, spectrum)


def apply_diffusion(field_: TransverseField, diffusion, t,
                    kernel: DiffusionKernel | None = None) -> TransverseField:
    """Convolve a coherence or field with the diffusion propagator.

    Zero-padded spectral convolution; the result is cropped back to the
    original frame.  Amplitude that has diffused outside the frame is
    discarded, which is the physical open-boundary behaviour.
    """
    if kernel is None:
        kernel = diffusion_kernel(diffusion, t, field_.grid)
    elif kernel.grid != field_.grid:
        raise KernelResolutionError("kernel was built for a different grid")
    if kernel.is_identity:
        return field_

    ny, nx = field_.grid.shape
    padded = np.zeros((2 * ny, 2 * nx), dtype=np.complex128)
    padded[ny // 2: ny // 2 + ny, nx // 2: nx // 2 + nx] = field_.values
    out = np.fft.ifft2(np.fft.fft2(padded) * kernel.spectrum)
    cropped = out[ny // 2: ny // 2 + ny, nx // 2: nx // 2 + nx]
    return field_.with_values(cropped)


def diffuse_spectral(field_: TransverseField, diffusion, t) -> TransverseField:
    """Diffusion step using the analytic transfer function exp(-D k^2 t).

    Same zero-padded open-boundary treatment as apply_diffusion, but the
    propagator spectrum is evaluated analytically, so arbitrarily short
    steps are exact and the sampled-kernel resolution guard does not
    apply.  Used for the sub-steps of operator-split storage evolution.
    """
    if diffusion < 0 or t < 0:
        raise KernelResolutionError("diffusion coefficient and time must be non-negative")
    if diffusion * t == 0.0:
        return field_
    grid = field_.grid
    ny, nx = grid.shape
    padded = np.zeros((2 * ny, 2 * nx), dtype=np.complex128)
    padded[ny // 2: ny // 2 + ny, nx // 2: nx // 2 + nx] = field_.values
    kx = 2.0 * np.pi * np.fft.fftfreq(2 * nx, grid.dx)
    ky = 2.0 * np.pi * np.fft.fftfreq(2 * ny, grid.dy)
    k2 = kx[np.newaxis, :] ** 2 + ky[:, np.newaxis] ** 2
    out = np.fft.ifft2(np.fft.fft2(padded) * np.exp(-diffusion * k2 * t))
    cropped = out[ny // 2: ny // 2 + ny, nx // 2: nx // 2 + nx]
    return field_.with_values(cropped)


def power_retention_tem00(w0, diffusion, t):
    """Fraction of TEM-00 power surviving transverse diffusion.

    Closed form for a flat-phase Gaussian of waist w0:
    retention = w0^2 / (4 D t + w0^2).
    """
    if w0 <= 0:
        raise GemsimError("waist must be positive")
    return w0**2 / (4.0 * diffusion * t + w0**2)


def infer_diffusion_coefficient(series):
    """Least-squares slope of sigma^2 versus t.

    ``series`` is an iterable of (t, sigma^2) pairs.  Returns
    (D, intercept, diagnostics) where diagnostics carries the residuals
    and the RMS residual of the fit.  The slope of the intensity-variance
    line is the diffusion coefficient directly.
    """
    pts = np.asarray(list(series), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise GemsimError("need at least 3 (t, sigma^2) points")
    t, s2 = pts[:, 0], pts[:, 1]
    if np.ptp(t) == 0.0:
        raise GemsimError("all sample times are identical; slope is undefined")
    design = np.column_stack([t, np.ones_like(t)])
    coeffs, _, _, _ = np.linalg.lstsq(design, s2, rcond=None)
    slope, intercept = coeffs
    residuals = s2 - design @ coeffs
    diagnostics = {
        "residuals": residuals,
        "rms_residual": float(np.sqrt(np.mean(residuals**2))),
        "n_points": len(t),
    }
    return float(slope), float(intercept), diagnostics


def mean_thermal_speed(temperature, atomic_mass):
    """Maxwell-Boltzmann mean speed sqrt(8 kB T / (pi m))."""
    return np.sqrt(8.0 * k_boltzmann * temperature / (np.pi * atomic_mass))


def kinetic_diffusion_coefficient(temperature, atomic_mass, collision_rate):
    """Kinetic-theory estimate D = v_bar^2 / (3 gamma_coll) in m^2/s."""
    if temperature <= 0 or atomic_mass <= 0 or collision_rate <= 0:
        raise GemsimError("temperature, mass and collision rate must be positive")
    v_bar = mean_thermal_speed(temperature, atomic_mass)
    return v_bar**2 / (3.0 * collision_rate)


def longitudinal_decay_factor(diffusion, eta, tau):
    """Amplitude retention from longitudinal diffusion of the spin wave.

    The gradient winds the spin wave to wavenumber eta*t; diffusion damps
    amplitude as exp(-D integral k(t)^2 dt) = exp(-D eta^2 tau^3 / 3),
    super-exponential in the storage time.  Efficiency carries the square.
    """
    if diffusion < 0 or tau < 0:
        raise GemsimError("diffusion and storage time must be non-negative")
    return float(np.exp(-diffusion * eta**2 * tau**3 / 3.0))
