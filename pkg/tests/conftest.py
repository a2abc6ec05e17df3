"""Shared fixtures for the gemsim test suite."""

import numpy as np
import pytest
from scipy.constants import c as c_light

from gemsim.core import MemoryParams, TransverseGrid
from gemsim.solver import GradientSchedule, PulseEnvelope

TWO_PI = 2.0 * np.pi


@pytest.fixture
def grid256():
    """Reference transverse grid: 15.36 mm extent, 60 um pitch."""
    n = 256
    extent = 15.36e-3
    return TransverseGrid(n, n, extent / n, extent / n)


@pytest.fixture
def grid128():
    n = 128
    extent = 15.36e-3
    return TransverseGrid(n, n, extent / n, extent / n)


@pytest.fixture
def grid64():
    n = 64
    extent = 15.36e-3
    return TransverseGrid(n, n, extent / n, extent / n)


def echo_params(beta=0.8, eta=TWO_PI * 1.0e7, detuning=TWO_PI * 1.5e9,
                omega_c=TWO_PI * 1.0e7, length=0.2, **overrides):
    """Loss-free memory parameters tuned to a target coupling strength.

    The atomic density is chosen so that the dimensionless coupling
    g^2 n Omega_c^2 / (c Delta^2 eta) equals ``beta``.
    """
    density = beta * c_light * detuning**2 * eta / omega_c**2
    defaults = dict(
        g=1.0, density=density, detuning=detuning, omega_c=omega_c,
        gamma=0.0, gamma_0=0.0, gamma_c=0.0, eta=eta, diffusion=0.0,
        w_control=3e-3, w_probe=1.5e-3, k0=TWO_PI / 795e-9, length=length,
    )
    defaults.update(overrides)
    return MemoryParams(**defaults)


def echo_setup(beta=0.8, fwhm=0.8e-6, center=1.0e-6, flip=12e-6,
               t_final=30e-6, **overrides):
    """Standard write/flip/recall configuration for echo tests."""
    params = echo_params(beta=beta, **overrides)
    pulse = PulseEnvelope.gaussian(fwhm=fwhm, center=center, dt=1e-8,
                                   t_final=t_final)
    schedule = GradientSchedule.standard_echo(params.eta, flip_time=flip,
                                              t_final=t_final)
    return params, pulse, schedule
