"""Simulation and 5-D target estimation for an 802.11ad UAV-swarm radar.

Range, Doppler velocity, azimuth, elevation and polarization are recovered
from synthesized polarimetric data cubes by matched filtering, CLEAN and 2-D
MUSIC over a uniform circular array.
"""

from .channel import DataCube, NoiseModel, fresnel_gamma, propagation_gain, synthesize_datacube
from .config import ExperimentConfig, config_hash, load_config
from .exceptions import (
    CleanDivergenceError,
    ConfigError,
    DimensionError,
    InvalidArgumentError,
    InvalidGeometryError,
    ProcessingError,
    TargetOverrunError,
    UndefinedAnglesError,
    WaveformOverrunError,
)
from .geometry import (
    NO_GROUND,
    ClutterScatterer,
    GroundModel,
    PolarimetricRcs,
    Scene,
    Target,
    UcaGeometry,
    cartesian_to_spherical,
    generate_clutter,
    half_wavelength_radius,
    spherical_to_cartesian,
    target_position_at,
    uca_positions,
)
from .music import MusicDOA, MusicGrid, SnapshotMatrix, covariance, noise_subspace, steering_vector
from .params import RadarParams, derive_params
from .pipeline import RunReport, run_experiment
from .rangedoppler import (
    CleanDetector,
    Detection,
    RangeDopplerMap,
    RangeDopplerProcessor,
    bin_to_physical,
    clean,
    doppler_fft,
    matched_filter_fast_time,
    notch_zero_doppler,
)
from .waveform import GolayPair, PulseWaveform, assemble_pri, build_cef_waveform, generate_golay_pair

__version__ = "0.1.0"
