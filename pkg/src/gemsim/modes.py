"""Hermite-Gauss mode generation and transverse intensity analysis.

Mode convention: E(x, y) is proportional to
H_m(sqrt(2) x / W) * H_n(sqrt(2) y / W) * exp(-(x^2 + y^2) / W^2),
so the TEM-00 intensity is exp(-2 r^2 / W^2) and its intensity variance
is W^2 / 4 per axis.  Generated modes are normalized to unit total power
on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermval
from scipy.ndimage import map_coordinates
from scipy.optimize import least_squares

from .core import (
    GemsimError,
    GridMismatchError,
    TransverseField,
    TransverseGrid,
    total_power,
)


class PeakDetectionError(GemsimError):
    """Too few peaks in a profile cut (over-diffused or wrong mode)."""


class MaskError(GemsimError):
    """Image mask is unusable (empty, unreadable or all black)."""


MAX_MODE_ORDER = 10


@dataclass(frozen=True)
class ModeIndex:
    """Hermite orders along x and y."""

    m: int
    n: int

    def __post_init__(self):
        if not (0 <= self.m <= MAX_MODE_ORDER and 0 <= self.n <= MAX_MODE_ORDER):
            raise GemsimError(
                f"mode orders must be in [0, {MAX_MODE_ORDER}], got ({self.m}, {self.n})"
            )


@dataclass(frozen=True)
class BeamStats:
    """First and second moments of an intensity distribution."""

    centroid_x: float
    centroid_y: float
    var_x: float
    var_y: float
    power: float

    @property
    def var_mean(self):
        return 0.5 * (self.var_x + self.var_y)


@dataclass(frozen=True)
class GaussianFit:
    """Elliptical 2D Gaussian least-squares fit result."""

    amplitude: float
    centroid_x: float
    centroid_y: float
    var_x: float
    var_y: float
    theta: float
    offset: float
    residual_norm: float
    converged: bool

    @property
    def var_mean(self):
        return 0.5 * (self.var_x + self.var_y)


def _hermite(order, u):
    coeffs = np.zeros(order + 1)
    coeffs[order] = 1.0
    return hermval(u, coeffs)


def hermite_gauss(idx: ModeIndex, waist, grid: TransverseGrid) -> TransverseField:
    """Generate a unit-power TEM-mn mode of the given waist."""
    if waist <= 0:
        raise GemsimError("waist must be positive")
    needed = 4.0 * waist * np.sqrt(max(idx.m, idx.n) + 1.0)
    if min(grid.extent_x, grid.extent_y) < needed:
        raise GemsimError(
            f"waist {waist:.3g} m too large for grid: mode ({idx.m},{idx.n}) "
            f"needs extent >= {needed:.3g} m"
        )
    x, y = grid.meshgrid()
    u = np.sqrt(2.0) * x / waist
    v = np.sqrt(2.0) * y / waist
    envelope = np.exp(-(x**2 + y**2) / waist**2)
    values = _hermite(idx.m, u) * _hermite(idx.n, v) * envelope
    field = TransverseField(grid, values.astype(np.complex128))
    return field.normalized()


def mode_overlap(a: TransverseField, b: TransverseField) -> complex:
    """Inner product <a|b> = sum conj(a) b dx dy."""
    if a.grid != b.grid:
        raise GridMismatchError("overlap requires both fields on the same grid")
    return complex(np.sum(np.conj(a.values) * b.values) * a.grid.cell_area)


def intensity_moments(field: TransverseField) -> BeamStats:
    """Centroid and variances of |E|^2 treated as a probability density."""
    w = field.intensity
    power = total_power(field)
    if power <= 0.0:
        raise GemsimError("zero-power field has no moments")
    x, y = field.grid.meshgrid()
    norm = w.sum()
    cx = float((w * x).sum() / norm)
    cy = float((w * y).sum() / norm)
    vx = float((w * (x - cx) ** 2).sum() / norm)
    vy = float((w * (y - cy) ** 2).sum() / norm)
    return BeamStats(cx, cy, vx, vy, power)


def _gaussian_model(params, x, y):
    amp, cx, cy, vx, vy, theta, offset = params
    ct, st = np.cos(theta), np.sin(theta)
    xr = ct * (x - cx) + st * (y - cy)
    yr = -st * (x - cx) + ct * (y - cy)
    return amp * np.exp(-(xr**2 / (2.0 * vx) + yr**2 / (2.0 * vy))) + offset


def _moment_seed(intensity, grid):
    offset0 = float(np.percentile(intensity, 5))
    body = np.clip(intensity - offset0, 0.0, None)
    x, y = grid.meshgrid()
    norm = body.sum()
    if norm <= 0.0:
        raise GemsimError("intensity has no strictly positive samples")
    cx = float((body * x).sum() / norm)
    cy = float((body * y).sum() / norm)
    vx = float((body * (x - cx) ** 2).sum() / norm)
    vy = float((body * (y - cy) ** 2).sum() / norm)
    vxy = float((body * (x - cx) * (y - cy)).sum() / norm)
    theta = 0.5 * np.arctan2(2.0 * vxy, vx - vy) if vx != vy or vxy else 0.0
    amp = float(intensity.max() - offset0)
    return [amp, cx, cy, max(vx, grid.dx**2), max(vy, grid.dy**2), theta, offset0]


def fit_gaussian_2d(intensity, grid: TransverseGrid,
                    max_iter: int = 200) -> GaussianFit:
    """Damped least-squares fit of an elliptical Gaussian with offset.

    Seeded from intensity moments.  On non-convergence the moment-based
    estimate is returned with ``converged = False``.  ``residual_norm`` is
    the integral of |data - model| over the grid, in the same units as
    total power, so it can be compared against the profile power directly.
    """
    intensity = np.asarray(intensity, dtype=float)
    if intensity.shape != grid.shape:
        raise GridMismatchError("intensity shape does not match grid")
    if not np.any(intensity > 0):
        raise GemsimError("intensity has no strictly positive samples")

    x, y = grid.meshgrid()
    seed = _moment_seed(intensity, grid)

    def residual(p):
        return (_gaussian_model(p, x, y) - intensity).ravel()

    scale = float(np.max(np.abs(intensity)))
    lower = [0.0, -np.inf, -np.inf, 1e-12 * grid.dx**2, 1e-12 * grid.dy**2,
             -np.pi, -np.inf]
    upper = [np.inf] * 5 + [np.pi, np.inf]
    result = least_squares(
        residual, seed, bounds=(lower, upper), max_nfev=max_iter,
        xtol=1e-14, ftol=1e-14, gtol=1e-14, x_scale="jac",
    )
    params = result.x if result.success else np.asarray(seed)
    res = np.abs(_gaussian_model(params, x, y) - intensity).sum() * grid.cell_area
    amp, cx, cy, vx, vy, theta, offset = params
    return GaussianFit(
        amplitude=float(amp), centroid_x=float(cx), centroid_y=float(cy),
        var_x=float(vx), var_y=float(vy), theta=float(theta),
        offset=float(offset), residual_norm=float(res),
        converged=bool(result.success) and scale > 0,
    )


def _axis_cut(intensity, grid):
    """Row of the intensity map passing through the centroid."""
    body = np.asarray(intensity, dtype=float)
    y = grid.y
    norm = body.sum()
    cy = float((body.sum(axis=1) * y).sum() / norm)
    row = int(np.argmin(np.abs(y - cy)))
    return body[row, :]


def smooth3(values):
    """Centred 3-point mean; endpoints average their available neighbours."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise GemsimError("need at least 3 samples to smooth")
    out = np.empty_like(v)
    out[1:-1] = (v[:-2] + v[1:-1] + v[2:]) / 3.0
    out[0] = (v[0] + v[1]) / 2.0
    out[-1] = (v[-2] + v[-1]) / 2.0
    return out


def tem20_peak_ratio(intensity, grid: TransverseGrid) -> float:
    """Central-to-outer peak height ratio along the centroid x-axis cut.

    The cut is smoothed with a 3-point mean before the local-maximum test.
    Raises PeakDetectionError when fewer than three peaks survive, which
    signals an over-diffused (merged) profile.
    """
    cut = smooth3(_axis_cut(intensity, grid))
    interior = cut[1:-1]
    # Plateau-tolerant local maxima: the symmetric grid places mirrored
    # samples at equal heights around the axis, so ties must count.
    ge = (interior >= cut[:-2]) & (interior >= cut[2:])
    strict = (interior > cut[:-2]) | (interior > cut[2:])
    candidates = np.nonzero(ge & strict)[0] + 1
    peak_idx = []
    for idx in candidates:
        if peak_idx and idx == peak_idx[-1] + 1 and cut[idx] == cut[peak_idx[-1]]:
            continue  # same plateau
        peak_idx.append(idx)
    peak_idx = np.asarray(peak_idx, dtype=int)
    if len(peak_idx) < 3:
        raise PeakDetectionError(
            f"found {len(peak_idx)} peaks on the axis cut; need 3"
        )
    # Central peak: nearest to the intensity centroid of the cut.
    x = grid.x
    cx = float((cut * x).sum() / cut.sum())
    centre = peak_idx[np.argmin(np.abs(x[peak_idx] - cx))]
    left = peak_idx[peak_idx < centre]
    right = peak_idx[peak_idx > centre]
    if len(left) == 0 or len(right) == 0:
        raise PeakDetectionError("no outer peak on one side of the centre")
    outer_left = left[np.argmax(cut[left])]
    outer_right = right[np.argmax(cut[right])]
    outer_mean = 0.5 * (cut[outer_left] + cut[outer_right])
    return float(cut[centre] / outer_mean)


def load_image_mask(image, carrier_waist, grid: TransverseGrid,
                    normalize: bool = True) -> TransverseField:
    """Shape a Gaussian carrier with an amplitude transmission mask.

    ``image`` is a 2D array of transmission values in [0, 1] (as produced
    by ``pgmio.read_pgm``) or a path to a PGM file.  The mask is stretched
    over the full grid extent by bilinear interpolation; the field is
    sqrt(transmission) times a TEM-00 carrier, renormalized to unit power.
    """
    if isinstance(image, (str, bytes)) or hasattr(image, "__fspath__"):
        from .pgmio import read_pgm
        image = read_pgm(image)
    mask = np.asarray(image, dtype=float)
    if mask.ndim != 2 or mask.size == 0:
        raise MaskError("mask image must be a non-empty 2D array")
    if mask.max() <= 0.0:
        raise MaskError("mask is all black; no field is transmitted")
    if carrier_waist <= 0:
        raise GemsimError("carrier waist must be positive")

    ny, nx = grid.shape
    src_ny, src_nx = mask.shape
    # Map grid pixel centres onto the source image, corner to corner.
    row = (np.arange(ny) + 0.5) / ny * src_ny - 0.5
    col = (np.arange(nx) + 0.5) / nx * src_nx - 0.5
    rr, cc = np.meshgrid(row, col, indexing="ij")
    resampled = map_coordinates(mask, [rr, cc], order=1, mode="nearest")
    resampled = np.clip(resampled, 0.0, None)

    x, y = grid.meshgrid()
    carrier = np.exp(-(x**2 + y**2) / carrier_waist**2)
    field = TransverseField(grid, np.sqrt(resampled) * carrier)
    if field.power <= 0.0:
        raise MaskError("masked carrier has zero power on the grid")
    return field.normalized() if normalize else field
