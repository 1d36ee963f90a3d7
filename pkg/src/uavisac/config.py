"""Experiment configuration: JSON schema, validation, presets and hashing.

Every section is a dataclass.  Loading walks the JSON tree, rejects unknown
keys and reports failures with the dotted path of the offending entry
(for example ``scene.uca.radius``).  Complex numbers are written as
``[re, im]`` pairs; angles are degrees, everything else SI.
"""

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .exceptions import ConfigError

PROFILES = ("paper", "desk")
PRESETS = ("paper_fig4",)


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _spec(default=dataclasses.MISSING, *, kind="float", check=None, choices=None, msg=None,
          factory=None):
    meta = {"kind": kind, "check": check, "choices": choices, "msg": msg}
    if factory is not None:
        return field(default_factory=factory, metadata=meta)
    return field(default=default, metadata=meta)


@dataclass
class RadarConfig:
    carrier_frequency: float = _spec(60e9, check=_positive, msg="must be positive")
    bandwidth: float = _spec(1.76e9, check=_positive, msg="must be positive")
    pri: float = _spec(2e-6, check=_positive, msg="must be positive")
    cpi: float = _spec(4e-3, check=_positive, msg="must be positive")
    energy_per_sample: float = _spec(1.0, check=_positive, msg="must be positive")


@dataclass
class ShapingConfig:
    rolloff: float = _spec(0.25, check=lambda v: 0 <= v <= 1, msg="must lie in [0, 1]")
    span: int = _spec(8, kind="int", check=_positive, msg="must be positive")


@dataclass
class WaveformConfig:
    variant: str = _spec("single_gu", kind="str", choices=("single_gu", "complementary_pair"))
    shaping: ShapingConfig | None = _spec(None, kind=("optional", ShapingConfig))


@dataclass
class UcaConfig:
    n_elements: int = _spec(8, kind="int", check=lambda v: v >= 2, msg="must be >= 2")
    radius: float = _spec(1.07, check=_positive, msg="must be positive")
    center: list = _spec(kind="vec3", factory=lambda: [0.0, 0.0, 20.0])
    beam_weights: list | None = _spec(None, kind="complex_list")
    element_pattern_h: float = _spec(1.0, check=_nonneg, msg="must be >= 0")
    element_pattern_v: float = _spec(1.0, check=_nonneg, msg="must be >= 0")


@dataclass
class GroundConfig:
    mode: str = _spec("fresnel", kind="str", choices=("fresnel", "fixed"))
    relative_permittivity: complex = _spec(complex(5.0, -0.5), kind="complex")
    fixed_gamma_h: complex = _spec(0j, kind="complex", check=lambda v: abs(v) <= 1,
                                   msg="|gamma| must not exceed 1")
    fixed_gamma_v: complex = _spec(0j, kind="complex", check=lambda v: abs(v) <= 1,
                                   msg="|gamma| must not exceed 1")


@dataclass
class RcsConfig:
    hh: float = _spec(1.0, check=_nonneg, msg="must be >= 0")
    hv: float = _spec(0.0, check=_nonneg, msg="must be >= 0")
    vh: float = _spec(0.0, check=_nonneg, msg="must be >= 0")
    vv: float = _spec(1.0, check=_nonneg, msg="must be >= 0")


@dataclass
class TargetConfig:
    range: float = _spec(check=_positive, msg="must be positive")
    azimuth: float = _spec(check=lambda v: -360 <= v <= 360, msg="must lie in [-360, 360]")
    elevation: float = _spec(check=lambda v: 0 <= v <= 180, msg="must lie in [0, 180]")
    radial_speed: float = _spec(0.0)
    rcs: RcsConfig = _spec(kind=RcsConfig, factory=RcsConfig)


@dataclass
class ClutterConfig:
    enabled: bool = _spec(False, kind="bool")
    patch: list = _spec(kind="patch", factory=lambda: [-15.0, 15.0, -15.0, 15.0])
    density: float = _spec(1.0, check=_positive, msg="must be positive")
    coefficient_db: float = _spec(-5.0)
    random_phase: bool = _spec(False, kind="bool")


@dataclass
class SceneConfig:
    uca: UcaConfig = _spec(kind=UcaConfig, factory=UcaConfig)
    ground: GroundConfig = _spec(kind=GroundConfig, factory=GroundConfig)
    targets: list = _spec(kind=("list", TargetConfig), factory=list)
    clutter: ClutterConfig = _spec(kind=ClutterConfig, factory=ClutterConfig)
    random_rcs_phases: bool = _spec(False, kind="bool")


@dataclass
class ProcessingConfig:
    max_targets: int = _spec(3, kind="int", check=_positive, msg="must be positive")
    max_iterations: int | None = _spec(None, kind="opt_int", check=_positive,
                                       msg="must be positive")
    stop_threshold_db: float = _spec(-30.0, check=lambda v: v <= 0, msg="must be <= 0")
    min_snr_db: float = _spec(16.0)
    notch_half_width: int = _spec(1, kind="int", check=_nonneg, msg="must be >= 0")
    window: str = _spec("none", kind="str", choices=("none", "hann"))
    interpolation: str = _spec("nearest", kind="str", choices=("nearest", "sinc"))
    snapshot_mode: str = _spec("slow_time", kind="str", choices=("slow_time", "doppler_bin"))
    azimuth_step: float = _spec(1.0, check=_positive, msg="must be positive")
    elevation_step: float = _spec(1.0, check=_positive, msg="must be positive")
    music_method: str = _spec("eigh", kind="str", choices=("eigh", "qr"))
    label_multipath: bool = _spec(True, kind="bool")
    multipath_range_bins: float = _spec(3.0, check=_nonneg, msg="must be >= 0")
    multipath_doppler_bins: float = _spec(2.0, check=_nonneg, msg="must be >= 0")


@dataclass
class NoiseConfig:
    noise_power: float = _spec(0.0, check=_nonneg, msg="must be >= 0")
    target_snr_db: float | None = _spec(None, kind="opt_float")
    snr_reference_target: int = _spec(-1, kind="int")


@dataclass
class DeskConfig:
    n_packets: int = _spec(256, kind="int", check=lambda v: v >= 2, msg="must be >= 2")
    fast_time_window: int = _spec(1024, kind="int", check=_positive, msg="must be positive")
    scale_array: bool = _spec(True, kind="bool")


@dataclass
class ExperimentConfig:
    name: str = _spec("custom", kind="str")
    notes: list = _spec(kind="str_list", factory=list)
    seed: int = _spec(0, kind="int", check=_nonneg, msg="must be >= 0")
    scale_profile: str = _spec("desk", kind="str", choices=PROFILES)
    radar: RadarConfig = _spec(kind=RadarConfig, factory=RadarConfig)
    waveform: WaveformConfig = _spec(kind=WaveformConfig, factory=WaveformConfig)
    scene: SceneConfig = _spec(kind=SceneConfig, factory=SceneConfig)
    processing: ProcessingConfig = _spec(kind=ProcessingConfig, factory=ProcessingConfig)
    noise: NoiseConfig = _spec(kind=NoiseConfig, factory=NoiseConfig)
    desk: DeskConfig = _spec(kind=DeskConfig, factory=DeskConfig)

    def to_dict(self):
        return _dump(self)

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        return _build(cls, data, "")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


# -- loading ---------------------------------------------------------------

def _join(path, key):
    return f"{path}.{key}" if path else str(key)


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key)
    if not math.isfinite(value):
        raise ConfigError("must be finite", key)
    return float(value)


def _integer(value, key):
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f"expected an integer, got {value!r}", key)
    return value


def _complex(value, key):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(_number(value, key))
    if isinstance(value, list) and len(value) == 2:
        return complex(_number(value[0], key), _number(value[1], key))
    raise ConfigError(f"expected a number or [re, im], got {value!r}", key)


def _convert(kind, value, key):
    if isinstance(kind, type) and dataclasses.is_dataclass(kind):
        return _build(kind, value, key)
    if isinstance(kind, tuple):
        wrapper, inner = kind
        if wrapper == "optional":
            return None if value is None else _build(inner, value, key)
        if not isinstance(value, list):
            raise ConfigError("expected a list", key)
        return [_build(inner, item, f"{key}[{i}]") for i, item in enumerate(value)]
    if kind == "float":
        return _number(value, key)
    if kind == "opt_float":
        return None if value is None else _number(value, key)
    if kind == "int":
        return _integer(value, key)
    if kind == "opt_int":
        return None if value is None else _integer(value, key)
    if kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"expected true or false, got {value!r}", key)
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", key)
        return value
    if kind == "str_list":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ConfigError("expected a list of strings", key)
        return list(value)
    if kind == "complex":
        return _complex(value, key)
    if kind == "complex_list":
        if value is None:
            return None
        if not isinstance(value, list):
            raise ConfigError("expected a list", key)
        return [_complex(v, f"{key}[{i}]") for i, v in enumerate(value)]
    if kind in ("vec3", "patch"):
        size = 3 if kind == "vec3" else 4
        if not isinstance(value, list) or len(value) != size:
            raise ConfigError(f"expected a list of {size} numbers", key)
        out = [_number(v, f"{key}[{i}]") for i, v in enumerate(value)]
        if kind == "patch" and not (out[1] > out[0] and out[3] > out[2]):
            raise ConfigError("patch must be [xmin, xmax, ymin, ymax] with positive area", key)
        return out
    raise AssertionError(kind)


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError("expected an object", path or None)
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError("unknown key", _join(path, unknown[0]))
    kwargs = {}
    for name, f in known.items():
        key = _join(path, name)
        if name not in data:
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
                raise ConfigError("required key is missing", key)
            continue
        meta = f.metadata
        value = _convert(meta["kind"], data[name], key)
        if meta["choices"] is not None and value not in meta["choices"]:
            raise ConfigError(f"must be one of {list(meta['choices'])}, got {value!r}", key)
        if meta["check"] is not None and value is not None and not meta["check"](value):
            raise ConfigError(f"{meta['msg']}, got {value!r}", key)
        kwargs[name] = value
    return cls(**kwargs)


def _dump(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _dump(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, list):
        return [_dump(v) for v in obj]
    return obj


def _check_cross(cfg):
    n = cfg.scene.uca.n_elements
    if cfg.scene.uca.beam_weights is not None and len(cfg.scene.uca.beam_weights) != n:
        raise ConfigError(f"expected {n} weights", "scene.uca.beam_weights")
    if cfg.scene.uca.center[2] <= 0:
        raise ConfigError("array must sit above the ground (z > 0)", "scene.uca.center")
    if cfg.radar.cpi < 2 * cfg.radar.pri:
        raise ConfigError("must hold at least two pri", "radar.cpi")
    ref = cfg.noise.snr_reference_target
    if cfg.noise.target_snr_db is not None:
        count = len(cfg.scene.targets)
        if count == 0 or not -count <= ref < count:
            raise ConfigError("does not index a configured target", "noise.snr_reference_target")
    return cfg


def parse_config(text, source="<string>"):
    if not text.strip():
        raise ConfigError(f"{source} is empty")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {source}: {exc}") from exc
    return _check_cross(ExperimentConfig.from_dict(data))


def preset_text(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    return resources.files("uavisac.presets").joinpath(f"{name}.json").read_text()


def load_config(path):
    """Load a JSON file, or a bundled preset when ``path`` names one."""
    if str(path) in PRESETS:
        return parse_config(preset_text(str(path)), f"preset {path}")
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from exc
    return parse_config(text, str(p))


def canonical_json(data):
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(cfg):
    return hashlib.sha256(canonical_json(cfg.to_dict()).encode()).hexdigest()
