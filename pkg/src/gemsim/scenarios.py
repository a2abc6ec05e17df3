"""Scenario runner: configured end-to-end storage/recall pipelines.

The default pipeline is factorized: the longitudinal memory dynamics are
summarized by homogeneous amplitude factors while the transverse physics
(diffusion, control-field burning, recall gating) evolves the stored
profile on the 2D grid.  Each scenario emits one CSV table plus PGM
intensity images into its output directory.  Runs are deterministic:
identical configuration gives byte-identical CSV output.

Configuration files are flat ``dotted.key = value`` text; unknown keys
are hard errors.  Units are converted once here: cm^2/s, mm, MHz
(cyclic, multiplied by 2 pi) and us at the boundary, SI plus rad/s
internally.  Keys ending in ``_rad_s`` bypass the 2 pi convention for
quantities the literature quotes as printed numbers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    ConfigError,
    GemsimError,
    MemoryParams,
    TransverseField,
    TransverseGrid,
    TWO_PI,
    convert_diffusion_units,
    total_power,
)
from .modes import (
    ModeIndex,
    PeakDetectionError,
    fit_gaussian_2d,
    hermite_gauss,
    intensity_moments,
    load_image_mask,
    mode_overlap,
    smooth3,
    tem20_peak_ratio,
)
from .pgmio import write_pgm
from .scattering import (
    apply_scattering_burn,
    half_plane_mask,
    masked_control_map,
    recall_gate,
    scattering_rate_map,
    storage_evolution,
)
from .transport import longitudinal_decay_factor

OUTPUT_DIR_ENV = "GEMSIM_OUTPUT_DIR"
CSV_SCHEMA = "gemsim-csv v1"

SCENARIOS = (
    "tem00_decay",      # TEM-00 efficiency and width vs storage time
    "het_vs_ccd",       # overlap (heterodyne) vs total (camera) efficiency
    "tem_mn_decay",     # Hermite-Gauss mode family decay
    "tem20_peak_ratio", # central/outer lobe ratio collapse
    "selective_recall", # half-plane control masks
    "image_storage",    # transparency-mask image input
)

# Registry of every accepted configuration key:
# key -> (type tag, default).  ``None`` defaults are resolved after parse.
KNOWN_KEYS = {
    "scenario": ("str", None),
    "output_dir": ("str", "gemsim_out"),
    "seed": ("int", 0),
    "grid.n": ("int", 256),
    "grid.extent_mm": ("float", 15.36),
    "memory.D_cm2_s": ("float", 13.2),
    "memory.eta_rad_per_s_per_m": ("float", TWO_PI * 1.0e7),
    "memory.gamma_MHz": ("float", 5.6),
    "memory.gamma0_rad_s": ("float", 0.0),
    "memory.gamma_c_rad_s": ("float", 0.0),
    "memory.omega_c_rad_s": ("float", 72.0e6),
    "memory.omega_c_MHz": ("float", None),
    "memory.detuning_rad_s": ("float", 1.5e9),
    "memory.detuning_MHz": ("float", None),
    "memory.w_probe_mm": ("float", 1.5),
    "memory.w_control_mm": ("float", 3.0),
    "memory.length_mm": ("float", 200.0),
    "pulse.fwhm_us": ("float", 2.0),
    "pipeline.rw_exposure_us": ("float", None),   # default: one pulse FWHM
    "pipeline.longitudinal": ("bool", False),
    "pipeline.storage_steps": ("int", 16),
    "storage.times_us": ("str", "0,6,12,18,24,30,36,42,48,54,60"),
    "storage.control_on": ("bool", False),
    "input.mode": ("str", "00"),
    "input.image": ("str", ""),
    "input.waist_mm": ("float", None),            # default: probe waist
    "control.mask": ("str", "none"),
    "control.offset_x_mm": ("float", 0.0),
    "control.offset_y_mm": ("float", 0.0),
    "modes.list": ("str", "00,10,11,20"),
    "images.shared_scale": ("bool", False),
}

CSV_COLUMNS = (
    "series", "t_us", "total_efficiency", "overlap_efficiency",
    "sigma_x2_m2", "sigma_y2_m2", "sigma2_fit_m2", "sigma2_moment_m2",
    "peak_ratio", "tau_fit_us", "image_scale",
)


def _coerce(key, type_tag, raw):
    try:
        if type_tag == "int":
            return int(raw)
        if type_tag == "float":
            return float(raw)
        if type_tag == "bool":
            low = str(raw).strip().lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        return str(raw).strip()
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r} for key {key!r} as {type_tag}") \
            from None


def parse_config_text(text) -> dict:
    """Parse flat dotted-key config text into a validated dict."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown configuration key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        type_tag, _ = KNOWN_KEYS[key]
        values[key] = _coerce(key, type_tag, raw.strip())
    return values


def parse_config_file(path) -> "ScenarioConfig":
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return config_from_dict(parse_config_text(text))


def _parse_mode(tag):
    tag = tag.strip()
    if len(tag) != 2 or not tag.isdigit():
        raise ConfigError(f"mode tag must be two digits 'mn', got {tag!r}")
    return ModeIndex(int(tag[0]), int(tag[1]))


def _parse_times_us(raw):
    try:
        times = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse storage times {raw!r}") from None
    if not times:
        raise ConfigError("storage time list is empty")
    if any(t < 0 for t in times):
        raise ConfigError("storage times must be non-negative")
    if sorted(set(times)) != times:
        raise ConfigError("storage times must be sorted and unique")
    return times


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario configuration (SI units)."""

    scenario: str
    params: MemoryParams
    grid: TransverseGrid
    storage_times: tuple          # seconds
    control_on: bool
    input_mode: ModeIndex | None
    input_image: str | None
    input_waist: float
    mode_list: tuple
    control_mask: str
    control_offset: tuple
    rw_exposure: float
    longitudinal: bool
    storage_steps: int
    pulse_fwhm: float
    shared_scale: bool
    output_dir: str
    seed: int


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Resolve defaults, units and cross-key constraints."""
    values = {key: (raw[key] if key in raw else default)
              for key, (_, default) in KNOWN_KEYS.items()}
    scenario = values["scenario"]
    if scenario is None:
        raise ConfigError("missing required key 'scenario'")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; pick one of {SCENARIOS}")

    if values["memory.omega_c_MHz"] is not None:
        if "memory.omega_c_rad_s" in raw:
            raise ConfigError("set omega_c via _MHz or _rad_s, not both")
        omega_c = TWO_PI * 1e6 * values["memory.omega_c_MHz"]
    else:
        omega_c = values["memory.omega_c_rad_s"]
    if values["memory.detuning_MHz"] is not None:
        if "memory.detuning_rad_s" in raw:
            raise ConfigError("set detuning via _MHz or _rad_s, not both")
        detuning = TWO_PI * 1e6 * values["memory.detuning_MHz"]
    else:
        detuning = values["memory.detuning_rad_s"]

    params = MemoryParams(
        detuning=detuning,
        omega_c=omega_c,
        gamma=TWO_PI * 1e6 * values["memory.gamma_MHz"],
        gamma_0=values["memory.gamma0_rad_s"],
        gamma_c=values["memory.gamma_c_rad_s"],
        eta=values["memory.eta_rad_per_s_per_m"],
        diffusion=convert_diffusion_units(values["memory.D_cm2_s"], "cm2/s", "m2/s"),
        w_control=values["memory.w_control_mm"] * 1e-3,
        w_probe=values["memory.w_probe_mm"] * 1e-3,
        length=values["memory.length_mm"] * 1e-3,
    )

    n = values["grid.n"]
    extent = values["grid.extent_mm"] * 1e-3
    grid = TransverseGrid(n, n, extent / n, extent / n)

    image = values["input.image"] or None
    mode = None if image else _parse_mode(values["input.mode"])
    waist = (values["input.waist_mm"] * 1e-3 if values["input.waist_mm"] is not None
             else params.w_probe)
    fwhm = values["pulse.fwhm_us"] * 1e-6
    exposure = (values["pipeline.rw_exposure_us"] * 1e-6
                if values["pipeline.rw_exposure_us"] is not None else fwhm)
    mask = values["control.mask"]
    if mask not in ("none", "left", "right", "top", "bottom"):
        raise ConfigError(f"unknown control mask {mask!r}")

    out_dir = os.environ.get(OUTPUT_DIR_ENV) or values["output_dir"]
    return ScenarioConfig(
        scenario=scenario,
        params=params,
        grid=grid,
        storage_times=tuple(t * 1e-6 for t in _parse_times_us(values["storage.times_us"])),
        control_on=values["storage.control_on"],
        input_mode=mode,
        input_image=image,
        input_waist=waist,
        mode_list=tuple(_parse_mode(tok) for tok in values["modes.list"].split(",")),
        control_mask=mask,
        control_offset=(values["control.offset_x_mm"] * 1e-3,
                        values["control.offset_y_mm"] * 1e-3),
        rw_exposure=exposure,
        longitudinal=values["pipeline.longitudinal"],
        storage_steps=values["pipeline.storage_steps"],
        pulse_fwhm=fwhm,
        shared_scale=values["images.shared_scale"],
        output_dir=out_dir,
        seed=values["seed"],
    )


@dataclass(frozen=True)
class ScenarioRow:
    series: str
    t_us: float
    total_efficiency: float
    overlap_efficiency: float
    sigma_x2: float
    sigma_y2: float
    sigma2_fit: float
    sigma2_moment: float
    peak_ratio: float = math.nan
    tau_fit_us: float = math.nan
    image_scale: float = math.nan


@dataclass(frozen=True)
class ScenarioResult:
    scenario: str
    rows: tuple
    csv_path: str | None
    image_paths: tuple = ()
    echo_fields: dict = field(default_factory=dict, repr=False)

    def series(self, name):
        return [r for r in self.rows if r.series == name]


def _input_field(config: ScenarioConfig, mode: ModeIndex | None) -> TransverseField:
    if config.input_image:
        return load_image_mask(config.input_image, config.input_waist, config.grid)
    return hermite_gauss(mode or config.input_mode, config.input_waist, config.grid)


def _evolve_once(config: ScenarioConfig, field0: TransverseField, t_storage,
                 mask_array=None):
    """One pass of the factorized pipeline; returns the recalled field."""
    params = config.params
    rate_map = scattering_rate_map(params, config.grid, config.control_offset)
    if mask_array is not None:
        rate_map = masked_control_map(rate_map, mask_array)

    coh = field0
    if mask_array is not None:
        # Only the illuminated part of the profile is written to the memory.
        coh = recall_gate(coh, mask_array)
    if config.rw_exposure > 0:
        coh = apply_scattering_burn(coh, rate_map, config.rw_exposure)

    coh = storage_evolution(coh, rate_map, params.diffusion, t_storage,
                            config.control_on, steps=config.storage_steps)

    decay = math.exp(-(params.gamma_0 + params.gamma_c) * t_storage)
    if config.longitudinal:
        decay *= longitudinal_decay_factor(params.diffusion, params.eta, t_storage)
    if decay != 1.0:
        coh = coh.with_values(coh.values * decay)

    if config.rw_exposure > 0:
        coh = apply_scattering_burn(coh, rate_map, config.rw_exposure)
    if mask_array is not None:
        coh = recall_gate(coh, mask_array)
    return coh


def _analyze(config: ScenarioConfig, series: str, t_storage,
             field0: TransverseField, echo: TransverseField,
             want_peak_ratio: bool) -> ScenarioRow:
    p_in = total_power(field0)
    p_out = total_power(echo)
    total = p_out / p_in
    overlap = abs(mode_overlap(field0.normalized(), echo)) ** 2 / p_in
    overlap = min(overlap, total)

    if p_out > 0:
        stats = intensity_moments(echo)
        fit = fit_gaussian_2d(echo.intensity, config.grid)
        sig_x2, sig_y2 = fit.var_x, fit.var_y
        sig2_fit = fit.var_mean
        sig2_mom = stats.var_mean
    else:
        sig_x2 = sig_y2 = sig2_fit = sig2_mom = math.nan

    ratio = math.nan
    if want_peak_ratio and p_out > 0:
        try:
            ratio = tem20_peak_ratio(echo.intensity, config.grid)
        except PeakDetectionError:
            ratio = math.nan

    return ScenarioRow(
        series=series, t_us=t_storage * 1e6,
        total_efficiency=total, overlap_efficiency=overlap,
        sigma_x2=sig_x2, sigma_y2=sig_y2,
        sigma2_fit=sig2_fit, sigma2_moment=sig2_mom,
        peak_ratio=ratio,
    )


def fit_exponential_decay(series):
    """Fit A exp(-t / tau) to (t, efficiency) pairs by log-linear least squares.

    Returns (A, tau, residuals) where residuals are in log space and keep
    their time ordering, so systematic curvature (super-exponential decay
    or the algebraic diffusion retention law) shows up as a signed trend.
    """
    pts = np.asarray(list(series), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise GemsimError("need at least 3 (t, efficiency) points")
    t, eff = pts[:, 0], pts[:, 1]
    if np.any(eff <= 0):
        raise GemsimError("efficiencies must be positive for a log fit")
    design = np.column_stack([t, np.ones_like(t)])
    coeffs, _, _, _ = np.linalg.lstsq(design, np.log(eff), rcond=None)
    slope, intercept = coeffs
    if slope >= 0:
        tau = math.inf
    else:
        tau = -1.0 / slope
    residuals = np.log(eff) - design @ coeffs
    return float(np.exp(intercept)), float(tau), residuals


def smooth_three_point(series):
    """Centred 3-point mean filter (endpoints use available neighbours)."""
    return smooth3(series)


def _tau_for_series(rows):
    pts = [(r.t_us, r.total_efficiency) for r in rows if r.total_efficiency > 0]
    if len(pts) < 3:
        return math.nan
    try:
        _, tau, _ = fit_exponential_decay(pts)
    except GemsimError:
        return math.nan
    return tau


def _format_float(value):
    return "%.17e" % value


def write_csv(path, rows, leading=None):
    """Write scenario rows with the versioned schema header.

    ``leading`` optionally prepends a (name, value-per-row) column, used
    by sweeps to tag the swept parameter.
    """
    header = list(CSV_COLUMNS)
    if leading is not None:
        header.insert(0, leading[0])
    lines = [f"# {CSV_SCHEMA}", ",".join(header)]
    for i, row in enumerate(rows):
        fields = [
            row.series, _format_float(row.t_us),
            _format_float(row.total_efficiency),
            _format_float(row.overlap_efficiency),
            _format_float(row.sigma_x2), _format_float(row.sigma_y2),
            _format_float(row.sigma2_fit), _format_float(row.sigma2_moment),
            _format_float(row.peak_ratio), _format_float(row.tau_fit_us),
            _format_float(row.image_scale),
        ]
        if leading is not None:
            fields.insert(0, str(leading[1][i]))
        lines.append(",".join(fields))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run_scenario(config: ScenarioConfig, write_outputs: bool = True) -> ScenarioResult:
    """Execute one scenario and (optionally) write its CSV and PGM artifacts."""
    if config.input_image and not os.path.exists(config.input_image):
        raise ConfigError(f"input image {config.input_image!r} does not exist")

    if config.scenario == "tem_mn_decay":
        series_specs = [(f"{m.m}{m.n}", m, None) for m in config.mode_list]
    elif config.scenario == "selective_recall":
        sides = ["left", "right"] if config.control_mask == "none" else [config.control_mask]
        series_specs = [("full", config.input_mode, None)]
        series_specs += [(side, config.input_mode,
                          half_plane_mask(config.grid, side)) for side in sides]
    else:
        name = "image" if config.input_image else f"{config.input_mode.m}{config.input_mode.n}"
        mask = (None if config.control_mask == "none"
                else half_plane_mask(config.grid, config.control_mask))
        series_specs = [(name, config.input_mode, mask)]

    want_ratio = config.scenario == "tem20_peak_ratio"
    all_rows = []
    echo_fields = {}
    for series, mode, mask in series_specs:
        field0 = _input_field(config, mode)
        rows = []
        for t_storage in config.storage_times:
            echo = _evolve_once(config, field0, t_storage, mask)
            rows.append(_analyze(config, series, t_storage, field0, echo, want_ratio))
            echo_fields[(series, rows[-1].t_us)] = echo
        tau = _tau_for_series(rows)
        all_rows.extend(replace(r, tau_fit_us=tau) for r in rows)

    csv_path = None
    image_paths = []
    if write_outputs:
        os.makedirs(config.output_dir, exist_ok=True)
        shared = None
        if config.shared_scale:
            shared = max(float(np.max(f.intensity)) for f in echo_fields.values())
            shared = shared if shared > 0 else None

        final_rows = []
        for row in all_rows:
            echo = echo_fields[(row.series, row.t_us)]
            name = f"{config.scenario}_{row.series}_echo_t{row.t_us:07.2f}us.pgm"
            path = os.path.join(config.output_dir, name)
            try:
                scale = write_pgm(path, echo.intensity, scale=shared)
            except OSError as exc:
                raise GemsimError(f"cannot write image {path}: {exc}") from exc
            image_paths.append(path)
            final_rows.append(replace(row, image_scale=scale))
        # Input profiles, one per series.
        for series, mode, _ in series_specs:
            field0 = _input_field(config, mode)
            path = os.path.join(config.output_dir, f"{config.scenario}_{series}_input.pgm")
            write_pgm(path, field0.intensity)
            image_paths.append(path)
        all_rows = final_rows
        csv_path = os.path.join(config.output_dir, f"{config.scenario}.csv")
        write_csv(csv_path, all_rows)

    return ScenarioResult(config.scenario, tuple(all_rows), csv_path,
                          tuple(image_paths), echo_fields)


# Sweepable parameter paths -> ScenarioConfig mutators.
_SWEEP_PATHS = {
    "storage.control_on": lambda cfg, v: replace(cfg, control_on=bool(v)),
    "memory.D_cm2_s": lambda cfg, v: replace(
        cfg, params=replace(cfg.params,
                            diffusion=convert_diffusion_units(float(v), "cm2/s", "m2/s"))),
    "memory.omega_c_rad_s": lambda cfg, v: replace(
        cfg, params=replace(cfg.params, omega_c=float(v))),
    "pipeline.rw_exposure_us": lambda cfg, v: replace(cfg, rw_exposure=float(v) * 1e-6),
    "input.waist_mm": lambda cfg, v: replace(cfg, input_waist=float(v) * 1e-3),
}


def sweep(config: ScenarioConfig, param_path: str, values,
          write_outputs: bool = True):
    """Run the scenario once per value of a swept parameter.

    Returns (results, merged_rows) where merged rows carry the swept value
    as the leading CSV column.  An empty value list is a successful no-op.
    """
    if param_path not in _SWEEP_PATHS:
        raise ConfigError(
            f"unknown sweep parameter {param_path!r}; "
            f"supported: {sorted(_SWEEP_PATHS)}")
    mutate = _SWEEP_PATHS[param_path]

    results = []
    merged_rows = []
    merged_values = []
    for i, value in enumerate(values):
        sub = mutate(config, value)
        if write_outputs:
            sub = replace(sub, output_dir=os.path.join(config.output_dir,
                                                       f"sweep_{i:03d}"))
        result = run_scenario(sub, write_outputs=write_outputs)
        results.append(result)
        merged_rows.extend(result.rows)
        merged_values.extend([value] * len(result.rows))

    if write_outputs:
        os.makedirs(config.output_dir, exist_ok=True)
        name = param_path.replace(".", "_")
        path = os.path.join(config.output_dir, f"sweep_{name}.csv")
        write_csv(path, merged_rows, leading=(param_path, merged_values))
    return results, merged_rows
