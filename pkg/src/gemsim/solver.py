"""Maxwell-Bloch integration of gradient-echo write, storage and recall.

The probe envelope E(z, t), in a frame co-moving at c, obeys

    dE/dz      = (i g n / c) rho13 + (i / 2 k0) Laplacian_xy E
    d rho13/dt = i g E + i Omega_c rho12 - (Gamma13 - i Delta) rho13
    d rho12/dt = i Omega_c rho13
                 - (gamma0 + gamma_c - i delta + i Omega_c^2/Delta) rho12

with Gamma13 = (2 gamma + gamma0 + gamma_c)/2 and a two-photon detuning
delta(z, t) = delta0 + eta(t) z set by the switchable gradient.

Two integration modes are provided.  The default "adiabatic" mode
eliminates rho13 (valid for Delta much larger than Omega_c and gamma),
leaving a non-stiff equation for rho12 that is advanced with an
exponential-midpoint step: the local phase/decay factor is applied
exactly and the field source enters at mid-step.  The "full" mode keeps
rho13 and is the slow reference integrator for cross-validation; its
explicit remainder step bounds dt by the one-photon detuning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c as c_light

from .core import (
    GemsimError,
    MemoryParams,
    NumericalInstabilityError,
    TransverseField,
    TransverseGrid,
)

WEAK_PROBE_LIMIT = 0.1


@dataclass(frozen=True)
class Segment:
    """One piecewise-constant interval of the gradient/control timeline."""

    t_start: float
    t_end: float
    eta: float
    control_on: bool
    control_scale: float = 1.0


@dataclass(frozen=True)
class GradientSchedule:
    """Contiguous segments covering [0, t_final]."""

    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise GemsimError("schedule needs at least one segment")
        if abs(segs[0].t_start) > 1e-15:
            raise GemsimError("schedule must start at t = 0")
        for prev, cur in zip(segs, segs[1:]):
            if not np.isclose(prev.t_end, cur.t_start, rtol=0, atol=1e-15):
                raise GemsimError("schedule segments must be contiguous")
        for seg in segs:
            if seg.t_end <= seg.t_start:
                raise GemsimError("segment must have positive duration")
        object.__setattr__(self, "segments", segs)

    @property
    def t_final(self):
        return self.segments[-1].t_end

    def flip_time(self):
        """Time of the first sign change of the gradient, or None."""
        for prev, cur in zip(self.segments, self.segments[1:]):
            if prev.eta * cur.eta < 0:
                return cur.t_start
        return None

    @classmethod
    def standard_echo(cls, eta, flip_time, t_final, read_control_on=True,
                      control_scale=1.0):
        """Write with +eta, flip to -eta at flip_time, recall until t_final."""
        return cls((
            Segment(0.0, flip_time, eta, True, control_scale),
            Segment(flip_time, t_final, -eta, read_control_on, control_scale),
        ))


@dataclass(frozen=True)
class PulseEnvelope:
    """Complex temporal envelope on a uniform time grid t = t0 + i dt."""

    samples: np.ndarray = field(repr=False)
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if self.dt <= 0:
            raise GemsimError("dt must be positive")
        if not np.all(np.isfinite(samples)):
            raise GemsimError("envelope contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    @property
    def times(self):
        return self.t0 + np.arange(len(self.samples)) * self.dt

    @property
    def energy(self):
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def at(self, t):
        """Linear interpolation; zero outside the sampled span."""
        re = np.interp(t, self.times, self.samples.real, left=0.0, right=0.0)
        im = np.interp(t, self.times, self.samples.imag, left=0.0, right=0.0)
        return re + 1j * im

    @classmethod
    def gaussian(cls, fwhm, center, dt, t_final, amplitude=1.0):
        """Gaussian pulse with intensity FWHM ``fwhm``, truncated at 4 sigma."""
        t = np.arange(0.0, t_final, dt)
        sigma = fwhm / (2.0 * np.sqrt(2.0 * np.log(2.0)))
        env = amplitude * np.exp(-2.0 * np.log(2.0) * (t - center) ** 2 / fwhm**2)
        env[np.abs(t - center) > 4.0 * sigma] = 0.0
        return cls(env.astype(np.complex128), dt, 0.0)


@dataclass(frozen=True)
class SpinWaveState:
    """Snapshot of the stored coherences along the cell."""

    t: float
    z: np.ndarray = field(repr=False)
    rho12: np.ndarray = field(repr=False)
    rho13: np.ndarray | None = field(repr=False, default=None)


@dataclass(frozen=True)
class EchoRecord:
    """Input/output envelopes and efficiency figures of one memory run."""

    input_envelope: PulseEnvelope
    output_envelope: PulseEnvelope
    recall_window: tuple
    total_efficiency: float
    overlap_efficiency: float | None = None
    echo_peak_time: float | None = None
    input_transverse: TransverseField | None = None
    output_transverse: TransverseField | None = None

    def __post_init__(self):
        if not (-1e-12 <= self.total_efficiency <= 1.02):
            warnings.warn(
                f"total efficiency {self.total_efficiency:.4f} outside [0, 1.02]; "
                "numerical overshoot or unconverged run",
                stacklevel=2,
            )
        if self.overlap_efficiency is not None:
            if self.overlap_efficiency > self.total_efficiency + 1e-9:
                raise GemsimError(
                    "overlap efficiency exceeds total efficiency: "
                    f"{self.overlap_efficiency} > {self.total_efficiency}"
                )


def _segment_coeffs(params: MemoryParams, seg: Segment, z):
    """Adiabatic-mode coefficients, constant within a segment."""
    denom = params.gamma_13 - 1j * params.detuning
    omega = params.omega_c * seg.control_scale if seg.control_on else 0.0
    delta = params.two_photon_detuning + seg.eta * z
    a = -params.g**2 * params.density / (c_light * denom)
    b = -params.g * params.density * omega / (c_light * denom)
    s = -params.g * omega / denom
    c_rate = (params.gamma_0 + params.gamma_c
              - 1j * delta
              + (1j * omega**2 / params.detuning if params.detuning else 0.0)
              + omega**2 / denom)
    return a, b, s, c_rate


def _solve_field_1d(rho12, boundary, a, b, dz):
    """Implicit-trapezoid sweep of dE/dz = a E + b rho12 from the entry face."""
    nz = len(rho12)
    denom = 1.0 - a * dz / 2.0
    amp = (1.0 + a * dz / 2.0) / denom
    src = (dz / 2.0) * b * (rho12[:-1] + rho12[1:]) / denom
    powers = np.empty(nz, dtype=np.complex128)
    powers[0] = 1.0
    powers[1:] = np.cumprod(np.full(nz - 1, amp, dtype=np.complex128))
    if np.min(np.abs(powers)) < 1e-12:
        # Strong per-cell attenuation: fall back to the stable direct sweep.
        e = np.empty(nz, dtype=np.complex128)
        e[0] = boundary
        for j in range(nz - 1):
            e[j + 1] = amp * e[j] + src[j]
        return e
    acc = np.empty(nz, dtype=np.complex128)
    acc[0] = 0.0
    acc[1:] = np.cumsum(src / powers[1:])
    return powers * (boundary + acc)


def _default_dt(params, input_pulse, schedule, mode):
    rates = [params.gamma_0 + params.gamma_c,
             abs(params.two_photon_detuning)]
    for seg in schedule.segments:
        rates.append(abs(seg.eta) * params.length / 2.0)
        if seg.control_on:
            omega = params.omega_c * seg.control_scale
            if mode == "full":
                rates.extend([abs(params.detuning), omega, params.gamma])
            else:
                denom = abs(params.gamma_13 - 1j * params.detuning)
                rates.append(omega**2 / denom if denom else 0.0)
                if params.detuning:
                    rates.append(omega**2 / abs(params.detuning))
    rate = max(max(rates), 1.0 / schedule.t_final)
    dt = 0.1 / rate
    # The exponential step handles the detuning phase exactly; dt only has
    # to resolve the pulse envelope and the coupling dynamics.
    if mode != "full":
        nonzero = np.abs(input_pulse.samples) > 0
        if np.any(nonzero):
            support = np.count_nonzero(nonzero) * input_pulse.dt
            dt = min(dt * 50.0, support / 80.0)
    return min(dt, schedule.t_final / 400.0)


_BLOWUP_FACTOR = 1e9


def _check_finite(arr, t, scale=1.0):
    """Abort on NaN/Inf or runaway growth relative to the input scale."""
    peak = float(np.max(np.abs(arr))) if arr.size else 0.0
    if not np.isfinite(peak) or peak > _BLOWUP_FACTOR * max(scale, 1e-300):
        raise NumericalInstabilityError(
            f"unstable state (max magnitude {peak:.3e}) at t = {t:.3e} s; "
            "reduce dt or check parameters"
        )


def _weak_probe_warn(max_rho, warned):
    if not warned and max_rho > WEAK_PROBE_LIMIT:
        warnings.warn(
            f"max |rho12| = {max_rho:.3f} exceeds the weak-probe regime; "
            "linearized dynamics are inaccurate",
            stacklevel=3,
        )
        return True
    return warned


def simulate_echo_1d(params: MemoryParams, input_pulse: PulseEnvelope,
                     schedule: GradientSchedule, nz: int = 256,
                     dt: float | None = None, mode: str = "adiabatic",
                     store_history: bool = False, recall_window=None):
    """Integrate the longitudinal-only memory and return (EchoRecord, history).

    ``mode`` is "adiabatic" (rho13 eliminated, default) or "full" (three
    level reference integrator).  History snapshots are stored once per
    segment boundary plus ``store_history`` interior snapshots.
    """
    if mode not in ("adiabatic", "full"):
        raise GemsimError(f"unknown integration mode {mode!r}")
    if nz < 8:
        raise GemsimError("nz must be at least 8")
    z = np.linspace(-params.length / 2.0, params.length / 2.0, nz)
    dz = z[1] - z[0]
    if dt is None:
        dt = _default_dt(params, input_pulse, schedule, mode)

    rho12 = np.zeros(nz, dtype=np.complex128)
    rho13 = np.zeros(nz, dtype=np.complex128) if mode == "full" else None
    in_scale = float(np.max(np.abs(input_pulse.samples))) or 1.0
    out_times, out_samples = [], []
    history = []
    warned = False
    max_rho = 0.0

    for seg in schedule.segments:
        duration = seg.t_end - seg.t_start
        n_steps = max(1, int(np.ceil(duration / dt)))
        h = duration / n_steps

        if mode == "adiabatic":
            a, b, s, c_rate = _segment_coeffs(params, seg, z)
            decay_full = np.exp(-c_rate * h)
            decay_half = np.exp(-c_rate * h / 2.0)
            for k in range(n_steps):
                t_mid = seg.t_start + (k + 0.5) * h
                boundary = input_pulse.at(t_mid)
                rho_half = rho12 * decay_half
                e_mid = _solve_field_1d(rho_half, boundary, a, b, dz)
                # One Picard pass: include the first half-step's source
                # deposit in the midpoint coherence before the final field
                # solve, making the exchange second order.
                e_mid = _solve_field_1d(rho_half + (h / 2.0) * s * e_mid,
                                        boundary, a, b, dz)
                rho12 = rho12 * decay_full + h * decay_half * (s * e_mid)
                out_times.append(t_mid)
                out_samples.append(e_mid[-1])
                if k % 128 == 0:
                    _check_finite(rho12, t_mid, in_scale)
            max_rho = max(max_rho, float(np.max(np.abs(rho12))))
        else:
            omega = params.omega_c * seg.control_scale if seg.control_on else 0.0
            delta = params.two_photon_detuning + seg.eta * z
            d13 = 1j * params.detuning - params.gamma_13
            d12 = (1j * delta - (params.gamma_0 + params.gamma_c)
                   - (1j * omega**2 / params.detuning if params.detuning else 0.0))
            b13 = 1j * params.g * params.density / c_light
            rot13_h, rot12_h = np.exp(d13 * h / 2.0), np.exp(d12 * h / 2.0)

            def field_of(r13, t):
                src = b13 * r13
                e = np.empty(nz, dtype=np.complex128)
                e[0] = input_pulse.at(t)
                e[1:] = e[0] + np.cumsum((src[:-1] + src[1:]) * dz / 2.0)
                return e

            def coupling(r13, r12, t):
                e = field_of(r13, t)
                return 1j * params.g * e + 1j * omega * r12, 1j * omega * r13, e

            for k in range(n_steps):
                t0 = seg.t_start + k * h
                rho13 = rho13 * rot13_h
                rho12 = rho12 * rot12_h
                k1_13, k1_12, _ = coupling(rho13, rho12, t0)
                k2_13, k2_12, _ = coupling(rho13 + h / 2 * k1_13,
                                           rho12 + h / 2 * k1_12, t0 + h / 2)
                k3_13, k3_12, _ = coupling(rho13 + h / 2 * k2_13,
                                           rho12 + h / 2 * k2_12, t0 + h / 2)
                k4_13, k4_12, e_end = coupling(rho13 + h * k3_13,
                                               rho12 + h * k3_12, t0 + h)
                rho13 = rho13 + h / 6 * (k1_13 + 2 * k2_13 + 2 * k3_13 + k4_13)
                rho12 = rho12 + h / 6 * (k1_12 + 2 * k2_12 + 2 * k3_12 + k4_12)
                rho13 = rho13 * rot13_h
                rho12 = rho12 * rot12_h
                out_times.append(t0 + h)
                out_samples.append(field_of(rho13, t0 + h)[-1])
                if k % 512 == 0:
                    _check_finite(rho12, t0, in_scale)
            max_rho = max(max_rho, float(np.max(np.abs(rho12))))

        warned = _weak_probe_warn(max_rho, warned)
        if store_history:
            history.append(SpinWaveState(seg.t_end, z.copy(), rho12.copy(),
                                         None if rho13 is None else rho13.copy()))

    out_times = np.asarray(out_times)
    out_samples = np.asarray(out_samples)
    _check_finite(out_samples, schedule.t_final, in_scale)

    if recall_window is None:
        flip = schedule.flip_time()
        recall_window = (flip, schedule.t_final) if flip is not None else (
            schedule.t_final, schedule.t_final)

    # Per-sample integration weights follow each segment's actual step.
    weights = np.empty_like(out_times)
    weights[:-1] = np.diff(out_times)
    weights[-1] = weights[-2] if len(weights) > 1 else dt
    in_window = (out_times >= recall_window[0]) & (out_times <= recall_window[1])
    echo_energy = float(np.sum(np.abs(out_samples[in_window]) ** 2
                               * weights[in_window]))
    in_energy = input_pulse.energy
    total_eff = echo_energy / in_energy if in_energy > 0 else 0.0

    peak_time = None
    if np.any(in_window) and np.max(np.abs(out_samples[in_window])) > 0:
        peak_time = float(out_times[in_window][
            np.argmax(np.abs(out_samples[in_window]))])

    # Resample the output onto a uniform grid for the envelope record.
    dt_out = float(np.min(weights))
    t_uniform = np.arange(out_times[0], out_times[-1], dt_out)
    out_uniform = (np.interp(t_uniform, out_times, out_samples.real)
                   + 1j * np.interp(t_uniform, out_times, out_samples.imag))
    record = EchoRecord(
        input_envelope=input_pulse,
        output_envelope=PulseEnvelope(out_uniform, dt_out, float(out_times[0])),
        recall_window=tuple(recall_window),
        total_efficiency=total_eff,
        echo_peak_time=peak_time,
    )
    return record, history


def simulate_echo_3d(params: MemoryParams, input_transverse: TransverseField | None,
                     input_temporal: PulseEnvelope, schedule: GradientSchedule,
                     nz: int = 32, dt: float | None = None,
                     uniform_control: bool = False, control_mask=None,
                     recall_window=None) -> EchoRecord:
    """Integrate the full 3D Maxwell-Bloch system at validation scale.

    Adds the transverse physics to the longitudinal solver: paraxial
    diffraction of the field, transverse diffusion of the coherence, and
    a transverse control-beam profile (Gaussian of waist w_control, or
    flat when ``uniform_control``).  Grids are capped at 64 points per
    axis; larger problems belong to the factorized scenario pipeline.

    With ``input_transverse=None`` the transverse sector degenerates to a
    single uniform sample and the result matches simulate_echo_1d.
    """
    if input_transverse is None:
        record, _ = simulate_echo_1d(params, input_temporal, schedule, nz=nz,
                                     dt=dt, recall_window=recall_window)
        return record

    grid = input_transverse.grid
    if nz > 64 or grid.nx > 64 or grid.ny > 64:
        raise GemsimError(
            "3D solver is a validation-scale tool (nz <= 64, transverse <= 64^2); "
            "use the factorized scenario pipeline for production grids"
        )
    z = np.linspace(-params.length / 2.0, params.length / 2.0, nz)
    dz = z[1] - z[0]
    if dt is None:
        dt = _default_dt(params, input_temporal, schedule, "adiabatic")
    in_scale = (float(np.max(np.abs(input_temporal.samples))) or 1.0) * \
        (float(np.max(np.abs(input_transverse.values))) or 1.0)

    x, y = grid.meshgrid()
    if uniform_control:
        profile = np.ones(grid.shape)
    else:
        profile = np.exp(-(x**2 + y**2) / params.w_control**2)
    if control_mask is not None:
        mask = np.asarray(control_mask)
        if mask.shape != grid.shape:
            raise GemsimError("control mask shape does not match the grid")
        profile = profile * mask.astype(float)

    k2 = grid.k_squared()
    diffraction = np.exp(-1j * k2 * dz / (2.0 * params.k0))
    denom = params.gamma_13 - 1j * params.detuning
    a = -params.g**2 * params.density / (c_light * denom)
    denom_tr = 1.0 - a * dz / 2.0
    amp = (1.0 + a * dz / 2.0) / denom_tr

    rho12 = np.zeros((grid.ny, grid.nx, nz), dtype=np.complex128)
    e_all = np.empty_like(rho12)
    boundary_mode = input_transverse.values

    out_times, out_power, out_overlap = [], [], []
    echo_sum = np.zeros(grid.shape, dtype=np.complex128)
    ref = input_transverse.normalized()
    warned = False

    if recall_window is None:
        flip = schedule.flip_time()
        recall_window = (flip, schedule.t_final) if flip is not None else (
            schedule.t_final, schedule.t_final)

    for seg in schedule.segments:
        duration = seg.t_end - seg.t_start
        n_steps = max(1, int(np.ceil(duration / dt)))
        h = duration / n_steps

        omega = (params.omega_c * seg.control_scale * profile
                 if seg.control_on else np.zeros(grid.shape))
        b_map = -params.g * params.density * omega / (c_light * denom)
        s_map = -params.g * omega / denom
        delta = params.two_photon_detuning + seg.eta * z
        c_rate = ((params.gamma_0 + params.gamma_c)
                  - 1j * delta[np.newaxis, np.newaxis, :]
                  + (1j * omega**2 / params.detuning)[:, :, np.newaxis]
                  + (omega**2 / denom)[:, :, np.newaxis])
        decay_full = np.exp(-c_rate * h)
        decay_half = np.exp(-c_rate * h / 2.0)
        diff_fac = (np.exp(-params.diffusion * k2 * h)
                    if params.diffusion > 0 else None)

        for k in range(n_steps):
            t_mid = seg.t_start + (k + 0.5) * h
            rho_half = rho12 * decay_half
            boundary = boundary_mode * input_temporal.at(t_mid)
            source = rho_half
            # Two sweeps: the second includes the first half-step's source
            # deposit in the midpoint coherence (one Picard pass), making
            # the field/coherence exchange second order as in the 1D solver.
            for _ in range(2):
                e = boundary
                e_all[:, :, 0] = e
                for j in range(nz - 1):
                    e = (amp * e + (dz / 2.0) * b_map
                         * (source[:, :, j] + source[:, :, j + 1]) / denom_tr)
                    e = np.fft.ifft2(np.fft.fft2(e) * diffraction)
                    e_all[:, :, j + 1] = e
                source = rho_half + (h / 2.0) * s_map[:, :, np.newaxis] * e_all
            rho12 = rho12 * decay_full + h * decay_half * (s_map[:, :, np.newaxis] * e_all)
            if diff_fac is not None:
                rho12 = np.fft.ifft2(
                    np.fft.fft2(rho12, axes=(0, 1)) * diff_fac[:, :, np.newaxis],
                    axes=(0, 1))

            e_end = e_all[:, :, -1]
            out_times.append(t_mid)
            out_power.append(float(np.sum(np.abs(e_end) ** 2) * grid.cell_area))
            out_overlap.append(complex(np.sum(np.conj(ref.values) * e_end)
                                       * grid.cell_area))
            if recall_window[0] <= t_mid <= recall_window[1]:
                echo_sum += e_end * h
            if k % 64 == 0:
                _check_finite(rho12, t_mid, in_scale)
        warned = _weak_probe_warn(float(np.max(np.abs(rho12))), warned)

    out_times = np.asarray(out_times)
    out_power = np.asarray(out_power)
    out_overlap = np.asarray(out_overlap)
    weights = np.empty_like(out_times)
    weights[:-1] = np.diff(out_times)
    weights[-1] = weights[-2] if len(weights) > 1 else dt

    p_in = input_transverse.power
    u_in = input_temporal.energy * p_in
    in_window = (out_times >= recall_window[0]) & (out_times <= recall_window[1])
    u_out = float(np.sum(out_power[in_window] * weights[in_window]))
    u_overlap = float(np.sum(np.abs(out_overlap[in_window]) ** 2
                             * weights[in_window]))
    total_eff = u_out / u_in if u_in > 0 else 0.0
    overlap_eff = u_overlap / u_in if u_in > 0 else 0.0

    peak_time = None
    if np.any(in_window) and np.max(out_power[in_window]) > 0:
        peak_time = float(out_times[in_window][np.argmax(out_power[in_window])])

    echo_field = TransverseField(grid, echo_sum)
    p_echo = echo_field.power
    target = total_eff * p_in
    if p_echo > 0 and target > 0:
        echo_field = echo_field.with_values(echo_sum * np.sqrt(target / p_echo))
    else:
        echo_field = TransverseField(grid, np.zeros(grid.shape, dtype=np.complex128))

    amp_env = np.sqrt(out_power)
    dt_out = float(np.min(weights))
    t_uniform = np.arange(out_times[0], out_times[-1], dt_out)
    out_uniform = np.interp(t_uniform, out_times, amp_env).astype(np.complex128)
    return EchoRecord(
        input_envelope=input_temporal,
        output_envelope=PulseEnvelope(out_uniform, dt_out, float(out_times[0])),
        recall_window=tuple(recall_window),
        total_efficiency=total_eff,
        overlap_efficiency=min(overlap_eff, total_eff),
        echo_peak_time=peak_time,
        input_transverse=input_transverse,
        output_transverse=echo_field,
    )


@dataclass(frozen=True)
class RamanSpectrum:
    """Absorption and dispersion of the (optionally broadened) Raman line."""

    delta: np.ndarray = field(repr=False)
    absorption: np.ndarray = field(repr=False)
    dispersion: np.ndarray = field(repr=False)
    broadened: bool = True


def raman_absorption_profile(params: MemoryParams, delta_range,
                             broadened: bool = True) -> RamanSpectrum:
    """Two-photon susceptibility versus two-photon detuning.

    The local line is a complex Lorentzian 1/(Gamma2 + i(delta - eta z))
    with Gamma2 = gamma0 + gamma_c + Omega_c^2 gamma / Delta^2.  The
    broadened profile is its average over the cell, evaluated in closed
    form; the gradient widens the feature to roughly eta * L.
    """
    delta = np.asarray(delta_range, dtype=float)
    if not np.all(np.isfinite(delta)):
        raise GemsimError("delta range must be finite")
    gamma2 = params.raman_linewidth
    if gamma2 <= 0:
        raise GemsimError("two-photon linewidth is zero; line shape is singular")

    if broadened and params.eta != 0.0:
        half = params.eta * params.length / 2.0
        chi = (np.log(gamma2 + 1j * (delta + half))
               - np.log(gamma2 + 1j * (delta - half))) / (1j * params.eta * params.length)
    else:
        chi = 1.0 / (gamma2 + 1j * delta)
    return RamanSpectrum(delta, chi.real, -chi.imag, broadened)


def recall_efficiencies(record: EchoRecord, reference: TransverseField):
    """(total, overlap) efficiencies of a recorded echo.

    total   = recalled transverse power / input transverse power
    overlap = |<reference|output>|^2 / (P_ref * P_in), the heterodyne-style
              figure, bounded above by total via Cauchy-Schwarz.
    """
    if record.output_transverse is None or record.input_transverse is None:
        raise GemsimError("record carries no transverse fields")
    p_ref = reference.power
    if p_ref <= 0:
        raise GemsimError("reference field has zero power")
    p_in = record.input_transverse.power
    out = record.output_transverse
    total = out.power / p_in
    from .modes import mode_overlap
    overlap = abs(mode_overlap(reference, out)) ** 2 / (p_ref * p_in)
    return total, min(overlap, total)
