"""Atomic diffusion spreads a stored transverse profile.

While a profile is stored as a spin coherence, thermal motion of the
atoms convolves it with a Gaussian of width sqrt(2 D t).  For the beam
intensity this means the variance grows linearly with slope exactly D,
which is how a measurement of sigma^2(t) infers the diffusion
coefficient.  A TEM-00 mode of waist W retains the closed-form power
fraction W^2 / (W^2 + 4 D t).
"""

import numpy as np

from gemsim import (
    ModeIndex,
    TransverseGrid,
    apply_diffusion,
    hermite_gauss,
    infer_diffusion_coefficient,
    intensity_moments,
    kinetic_diffusion_coefficient,
    mean_thermal_speed,
    power_retention_tem00,
    total_power,
)

D = 13.2e-4       # m^2/s  (13.2 cm^2/s)
WAIST = 1.5e-3    # m


def main():
    n, extent = 256, 15.36e-3
    grid = TransverseGrid(n, n, extent / n, extent / n)
    mode = hermite_gauss(ModeIndex(0, 0), WAIST, grid)

    print("storage (us)   sigma^2 (mm^2)   power retained   closed form")
    series = []
    for t_us in range(0, 61, 12):
        t = t_us * 1e-6
        out = apply_diffusion(mode, D, t)
        var = intensity_moments(out).var_mean
        retained = total_power(out) / total_power(mode)
        series.append((t, var))
        print(f"{t_us:12d}   {var * 1e6:14.5f}   {retained:14.4f}"
              f"   {power_retention_tem00(WAIST, D, t):11.4f}")

    slope, intercept, _ = infer_diffusion_coefficient(series)
    print(f"\nfitted slope = {slope * 1e4:.3f} cm^2/s "
          f"(configured D = {D * 1e4:.1f} cm^2/s)")
    print(f"fitted intercept = {intercept * 1e6:.5f} mm^2 "
          f"(W^2/4 = {WAIST**2 / 4 * 1e6:.5f} mm^2)")

    # Kinetic-theory estimate for Rb-87 in 0.5 Torr of buffer gas at 343 K.
    mass = 86.909180527 * 1.66053906892e-27
    rate = 17e6 * 0.5   # collision rate: 17 MHz/Torr at 0.5 Torr
    d_est = kinetic_diffusion_coefficient(343.0, mass, rate)
    print(f"\nkinetic theory: mean speed = "
          f"{mean_thermal_speed(343.0, mass):.0f} m/s, "
          f"D = {d_est * 1e4:.1f} cm^2/s")


if __name__ == "__main__":
    main()
