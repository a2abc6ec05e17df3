"""gemsim: numerical simulator of a three-level gradient echo memory.

Stores and recalls optical pulses with arbitrary transverse profiles and
models the two dominant spatial decoherence channels of a warm-vapour
memory: atomic diffusion of the stored coherence and inhomogeneous
control-field scattering.
"""

from .core import (
    ConfigError,
    GemsimError,
    GridMismatchError,
    MemoryParams,
    NumericalInstabilityError,
    TransverseField,
    TransverseGrid,
    convert_diffusion_units,
    spectral_power,
    total_power,
)
from .modes import (
    BeamStats,
    GaussianFit,
    ModeIndex,
    PeakDetectionError,
    fit_gaussian_2d,
    hermite_gauss,
    intensity_moments,
    load_image_mask,
    mode_overlap,
    tem20_peak_ratio,
)
from .solver import (
    EchoRecord,
    GradientSchedule,
    PulseEnvelope,
    Segment,
    SpinWaveState,
    raman_absorption_profile,
    recall_efficiencies,
    simulate_echo_1d,
    simulate_echo_3d,
)
from .transport import (
    DiffusionKernel,
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
from .scattering import (
    ScatteringMap,
    apply_scattering_burn,
    half_plane_mask,
    masked_control_map,
    recall_gate,
    scattering_rate_map,
    storage_evolution,
)
from .scenarios import (
    ScenarioConfig,
    ScenarioResult,
    config_from_dict,
    fit_exponential_decay,
    parse_config_file,
    run_scenario,
    smooth_three_point,
    sweep,
)

__version__ = "0.1.0"
