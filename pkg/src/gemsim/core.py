"""Shared grids, fields and physical parameters for the GEM simulator.

All internal quantities are SI: lengths in metres, rates and detunings in
angular frequency (rad/s), diffusion coefficients in m^2/s.  Unit
conversions happen once, at the configuration boundary.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


class GemsimError(Exception):
    """Base class for simulator errors."""


class GridMismatchError(GemsimError):
    """Two fields or maps do not live on the same transverse grid."""


class ConfigError(GemsimError):
    """Invalid configuration input."""


class NumericalInstabilityError(GemsimError):
    """A time stepper produced non-finite values."""


@dataclass(frozen=True)
class TransverseGrid:
    """Uniform 2D sampling grid, centred on the beam axis.

    Sample counts must be even so the origin sits between samples on both
    axes, which keeps mirrored samples exactly opposite each other.
    """

    nx: int
    ny: int
    dx: float
    dy: float

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ConfigError(f"grid must be at least 8x8, got {self.nx}x{self.ny}")
        if self.nx % 2 or self.ny % 2:
            raise ConfigError("grid sample counts must be even")
        if self.dx <= 0 or self.dy <= 0:
            raise ConfigError("grid pitch must be positive")

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def x(self):
        """Sample abscissae (m); origin lies between the two central samples."""
        return (np.arange(self.nx) - (self.nx - 1) / 2.0) * self.dx

    @property
    def y(self):
        return (np.arange(self.ny) - (self.ny - 1) / 2.0) * self.dy

    def meshgrid(self):
        return np.meshgrid(self.x, self.y)

    @property
    def extent_x(self):
        return self.nx * self.dx

    @property
    def extent_y(self):
        return self.ny * self.dy

    @property
    def cell_area(self):
        return self.dx * self.dy

    def kx(self):
        """Angular spatial frequencies along x, FFT ordering (rad/m)."""
        return TWO_PI * np.fft.fftfreq(self.nx, self.dx)

    def ky(self):
        return TWO_PI * np.fft.fftfreq(self.ny, self.dy)

    def k_squared(self):
        kx = self.kx()
        ky = self.ky()
        return kx[np.newaxis, :] ** 2 + ky[:, np.newaxis] ** 2

    def check_waist(self, waist):
        """Warn if a beam of the given waist does not comfortably fit."""
        if min(self.extent_x, self.extent_y) < 4.0 * waist:
            warnings.warn(
                f"grid extent {self.extent_x:.3g} x {self.extent_y:.3g} m is "
                f"less than 4 waists ({waist:.3g} m); edge clipping likely",
                stacklevel=2,
            )


@dataclass(frozen=True)
class TransverseField:
    """Complex field envelope sampled on a transverse grid (shape ny, nx)."""

    grid: TransverseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise GridMismatchError(
                f"values shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise GemsimError("field contains non-finite samples")
        object.__setattr__(self, "values", values)

    @property
    def power(self):
        return total_power(self)

    @property
    def intensity(self):
        return np.abs(self.values) ** 2

    def with_values(self, values):
        return TransverseField(self.grid, values)

    def normalized(self):
        """Scale to unit total power."""
        p = self.power
        if p <= 0.0:
            raise GemsimError("cannot normalize a zero-power field")
        return self.with_values(self.values / np.sqrt(p))


def total_power(field_: TransverseField) -> float:
    """Riemann sum of |E|^2 over the grid."""
    return float(np.sum(np.abs(field_.values) ** 2) * field_.grid.cell_area)


def spectral_power(field_: TransverseField) -> float:
    """Total power evaluated in the Fourier domain (Parseval check)."""
    f = np.fft.fft2(field_.values)
    n = field_.grid.nx * field_.grid.ny
    return float(np.sum(np.abs(f) ** 2) / n * field_.grid.cell_area)


_DIFFUSION_UNIT_FACTORS = {
    "m2/s": 1.0,
    "cm2/s": 1.0e-4,
}


def convert_diffusion_units(value, from_unit, to_unit):
    """Convert a diffusion coefficient between cm^2/s and m^2/s."""
    try:
        f_from = _DIFFUSION_UNIT_FACTORS[from_unit]
        f_to = _DIFFUSION_UNIT_FACTORS[to_unit]
    except KeyError as exc:
        raise ConfigError(
            f"unknown diffusion unit {exc.args[0]!r}; "
            f"expected one of {sorted(_DIFFUSION_UNIT_FACTORS)}"
        ) from None
    return value * f_from / f_to


@dataclass(frozen=True)
class MemoryParams:
    """Physical constants of the memory.

    All rates are angular frequencies (rad/s).  ``g`` couples field units
    to Rabi frequency; fields are stored in units where the same ``g``
    also sources the propagation equation.
    """

    g: float = 1.0              # vacuum Rabi coupling, rad/s per field unit
    density: float = 1.0e18     # atomic number density, m^-3
    detuning: float = TWO_PI * 1.5e9   # one-photon detuning Delta, rad/s
    omega_c: float = TWO_PI * 1.0e7    # control Rabi frequency on axis, rad/s
    gamma: float = TWO_PI * 5.6e6      # excited-state decay, rad/s
    gamma_0: float = 0.0               # ground-state dephasing, rad/s
    gamma_c: float = 0.0               # population exchange, rad/s
    eta: float = TWO_PI * 1.0e7        # gradient slope, rad/s per metre
    diffusion: float = 1.32e-3         # D, m^2/s
    w_control: float = 3.0e-3          # control beam waist, m
    w_probe: float = 1.5e-3            # probe beam waist, m
    k0: float = TWO_PI / 795e-9        # probe wavenumber, rad/m
    length: float = 0.2                # cell length, m
    two_photon_detuning: float = 0.0   # base delta offset, rad/s

    def __post_init__(self):
        for name in ("density", "omega_c", "gamma", "gamma_0", "gamma_c",
                     "diffusion", "w_control", "w_probe", "k0", "length"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.gamma > 0 and abs(self.detuning) < 10.0 * self.gamma:
            warnings.warn(
                "one-photon detuning is less than 10x the excited-state "
                "decay rate; Raman (adiabatic) approximations degrade",
                stacklevel=2,
            )

    @property
    def gamma_13(self):
        """Total coherence decay rate of rho13: (2*gamma + gamma_0 + gamma_c)/2."""
        return 0.5 * (2.0 * self.gamma + self.gamma_0 + self.gamma_c)

    @property
    def raman_linewidth(self):
        """Two-photon linewidth: gamma_0 + gamma_c + omega_c^2 gamma / detuning^2."""
        return self.gamma_0 + self.gamma_c + self.omega_c**2 * self.gamma / self.detuning**2

    def coupling_beta(self):
        """Dimensionless GEM coupling g^2 n Omega_c^2 / (c Delta^2 eta)."""
        from scipy.constants import c as c_light
        return (self.g**2 * self.density * self.omega_c**2
                / (c_light * self.detuning**2 * abs(self.eta)))
