"""End-to-end experiment: synthesis, range-Doppler maps, CLEAN and MUSIC."""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .channel import NoiseModel, synthesize_datacube
from .config import config_hash
from .exceptions import ConfigError, ProcessingError
from .geometry import (
    GroundModel,
    PolarimetricRcs,
    Scene,
    Target,
    UcaGeometry,
    generate_clutter,
    half_wavelength_radius,
    spherical_to_cartesian,
)
from .music import MusicDOA, SnapshotMatrix, doppler_compensated
from .params import RadarParams
from .rangedoppler import (
    CleanDetector,
    RangeDopplerProcessor,
    measure_cell,
    notch_zero_doppler,
    slow_time_rows,
)
from .waveform import default_waveforms, raised_cosine_taps

log = logging.getLogger(__name__)

# spawn keys of the named random substreams hanging off the root seed
STREAMS = {"noise": 1, "clutter": 2, "rcs_phase": 3}
MAP_CSV_ROWS = 512


def substream_seed(seed, name):
    ss = np.random.SeedSequence(seed, spawn_key=(STREAMS[name],))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class Setup:
    """Domain objects resolved from a config for one profile and seed."""

    params: RadarParams
    scene: Scene
    waveforms: tuple
    profile: str
    seed: int
    dtype: type


def build_params(cfg, profile):
    r = cfg.radar
    if profile == "paper":
        return RadarParams(r.carrier_frequency, r.bandwidth, r.pri, r.cpi, r.energy_per_sample)
    base = RadarParams(r.carrier_frequency, r.bandwidth, r.pri, r.cpi, r.energy_per_sample)
    window = min(cfg.desk.fast_time_window, base.samples_per_pri)
    return RadarParams(r.carrier_frequency, r.bandwidth, r.pri, cfg.desk.n_packets * r.pri,
                       r.energy_per_sample, fast_time_window=window)


def build_scene(cfg, params, profile, seed):
    sc = cfg.scene
    radius = sc.uca.radius
    if profile == "desk" and cfg.desk.scale_array:
        radius = half_wavelength_radius(sc.uca.n_elements, params.wavelength)
    uca = UcaGeometry(n_elements=sc.uca.n_elements, radius=radius, center=tuple(sc.uca.center),
                      beam_weights=None if sc.uca.beam_weights is None
                      else np.asarray(sc.uca.beam_weights),
                      element_pattern_h=sc.uca.element_pattern_h,
                      element_pattern_v=sc.uca.element_pattern_v)
    rng = np.random.default_rng(substream_seed(seed, "rcs_phase"))
    targets = []
    for t in sc.targets:
        rcs = PolarimetricRcs(t.rcs.hh, t.rcs.hv, t.rcs.vh, t.rcs.vv)
        if sc.random_rcs_phases:
            rcs = rcs.with_random_phases(rng)
        targets.append(Target((t.range, t.azimuth, t.elevation), t.radial_speed, rcs))
    clutter = []
    if sc.clutter.enabled:
        clutter = generate_clutter(sc.clutter.patch, sc.clutter.density,
                                   sc.clutter.coefficient_db, substream_seed(seed, "clutter"),
                                   sc.clutter.random_phase)
    g = sc.ground
    ground = GroundModel(g.relative_permittivity, g.mode, g.fixed_gamma_h, g.fixed_gamma_v)
    return Scene(uca, targets, clutter, ground)


def build_setup(cfg, profile=None, seed=None):
    profile = profile or cfg.scale_profile
    if profile not in ("paper", "desk"):
        raise ConfigError(f"unknown profile {profile!r}", "scale_profile")
    seed = cfg.seed if seed is None else int(seed)
    try:
        params = build_params(cfg, profile)
        scene = build_scene(cfg, params, profile, seed)
        shaping = None
        if cfg.waveform.shaping is not None:
            shaping = raised_cosine_taps(cfg.waveform.shaping.rolloff, cfg.waveform.shaping.span)
        waves = default_waveforms(cfg.waveform.variant, params.amplitude, shaping)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    dtype = np.complex64 if profile == "paper" else np.complex128
    return Setup(params, scene, waves, profile, seed, dtype)


def _processor(setup, window):
    refs = setup.waveforms if len(setup.waveforms) > 1 else setup.waveforms[0]
    return RangeDopplerProcessor(refs, setup.params, window).fit()


def calibrate_noise_power(setup, target_index, snr_db, polarization="V", window="none",
                          interpolation="nearest"):
    """Noise variance giving ``snr_db`` on one target's direct return.

    SNR is measured in the range-Doppler map: antenna-averaged peak power of
    the noiseless target against the per-cell noise power, which equals the
    per-sample variance times the reference energy.
    """
    tgt = setup.scene.targets[target_index]
    solo = Scene(setup.scene.uca, [tgt], [], setup.scene.ground)
    cubes = synthesize_datacube(solo, setup.params, setup.waveforms,
                                interpolation=interpolation, dtype=setup.dtype)
    cube = cubes[0] if polarization == "H" else cubes[1]
    del cubes
    proc = _processor(setup, window)
    rd = proc.transform(cube)
    del cube
    expected = int(round(2 * tgt.position0[0] / (setup.params.c * setup.params.sample_period)))
    lo, hi = max(0, expected - 2), min(rd.n_range, expected + 3)
    peak = float(np.max(np.mean(np.abs(rd.values[:, lo:hi]) ** 2, axis=0)))
    return peak / (proc.reference_energy_ * 10 ** (snr_db / 10))


@dataclass
class RunReport:
    detections: list
    map_paths: list = field(default_factory=list)
    spectrum_paths: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    config_hash: str = ""
    profile: str = ""
    seed: int = 0
    noise_power: float = 0.0
    multipath: list = field(default_factory=list)
    clean_status: dict = field(default_factory=dict)
    excluded: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    derived: dict = field(default_factory=dict)
    error: str | None = None

    def detection_records(self):
        return [d.to_record() for d in self.detections]

    def to_dict(self):
        return {
            "config_hash": self.config_hash,
            "profile": self.profile,
            "seed": self.seed,
            "noise_power": self.noise_power,
            "detections": self.detection_records(),
            "multipath_detections": [d.to_record() for d in self.multipath],
            "map_paths": [str(p) for p in self.map_paths],
            "spectrum_paths": [str(p) for p in self.spectrum_paths],
            "timing_s": self.timing,
            "clean": self.clean_status,
            "excluded_scatterers": self.excluded,
            "notes": self.notes,
            "derived": self.derived,
            "error": self.error,
        }


@contextmanager
def _stage(name, timing):
    t0 = time.perf_counter()
    try:
        yield
    except ProcessingError:
        raise
    except Exception as exc:
        raise ProcessingError(name, exc) from exc
    finally:
        timing[name] = timing.get(name, 0.0) + time.perf_counter() - t0


def _rms(amps):
    return float(np.sqrt(np.mean(np.abs(amps) ** 2)))


def _music_snapshots(det, rows, mode, rd_map):
    if mode == "doppler_bin":
        return SnapshotMatrix(rows[:, det.doppler_bin][:, None], "doppler_bin")
    return doppler_compensated(slow_time_rows(rows), det.doppler, rd_map.pulse_interval)


def bounce_predictions(det, center, wavelength=None):
    """Predicted (range, velocity) of ground-bounce replicas of a direct detection.

    Uses the detection's 3-D position and assumes motion straight toward the
    array center.  Returns the single-bounce (mixed) and double-bounce pairs.
    """
    c = np.asarray(center, dtype=float)
    pos = c + spherical_to_cartesian(det.range, det.azimuth, det.elevation)
    u = (pos - c) / det.range
    vel = -det.velocity * u
    mirror = np.array([1.0, 1.0, -1.0])
    img, img_vel = pos * mirror, vel * mirror
    r_img = float(np.linalg.norm(img - c))
    v_img = float(-np.dot((img - c) / r_img, img_vel))
    return [((det.range + r_img) / 2, (det.velocity + v_img) / 2), (r_img, v_img)]


def label_multipath(detections, center, range_tol, velocity_tol):
    """Mark detections that sit where a stronger direct return's bounce lands."""
    direct = []
    for i, det in enumerate(detections):
        det.multipath_of = None
        for j in direct:
            src = detections[j]
            if src.azimuth is None or det.range <= src.range:
                continue
            for r_pred, v_pred in bounce_predictions(src, center):
                if abs(det.range - r_pred) <= range_tol and abs(det.velocity - v_pred) <= velocity_tol:
                    det.multipath_of = j
                    break
            if det.multipath_of is not None:
                break
        if det.multipath_of is None:
            direct.append(i)
    return detections


def run_experiment(cfg, out_dir=None, *, profile=None, seed=None, polarizations=("H", "V"),
                   export_cubes=False):
    """Run the full chain and (optionally) write artifacts to ``out_dir``.

    Both polarization maps are always formed so every detection carries H
    and V amplitudes; detection and MUSIC run for ``polarizations``.
    """
    setup = build_setup(cfg, profile, seed)
    timing = {}
    report = RunReport([], config_hash=config_hash(cfg), profile=setup.profile, seed=setup.seed,
                       notes=list(cfg.notes), timing=timing)
    p = setup.params
    report.derived = {
        "P": p.n_fast, "Q": p.n_packets, "wavelength_m": p.wavelength,
        "range_resolution_m": p.range_resolution, "velocity_resolution_mps": p.velocity_resolution,
        "max_unambiguous_velocity_mps": p.max_unambiguous_velocity, "max_range_m": p.max_range,
        "array_radius_m": setup.scene.uca.radius,
    }
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    try:
        _run(cfg, setup, report, out, polarizations, export_cubes)
    except ProcessingError as exc:
        report.error = str(exc)
        if out is not None:
            io.write_json(out / "report.json", report.to_dict())
        raise
    return report


def _run(cfg, setup, report, out, polarizations, export_cubes):
    proc_cfg = cfg.processing
    timing = report.timing
    params, scene = setup.params, setup.scene

    with _stage("noise_calibration", timing):
        noise_power = cfg.noise.noise_power
        if cfg.noise.target_snr_db is not None:
            noise_power = calibrate_noise_power(setup, cfg.noise.snr_reference_target,
                                                cfg.noise.target_snr_db,
                                                window=proc_cfg.window,
                                                interpolation=proc_cfg.interpolation)
        report.noise_power = float(noise_power)

    with _stage("synthesis", timing):
        noise = NoiseModel(noise_power, substream_seed(setup.seed, "noise"))
        cubes = dict(zip(("H", "V"), synthesize_datacube(
            scene, params, setup.waveforms, noise, interpolation=proc_cfg.interpolation,
            dtype=setup.dtype)))
        report.excluded = list(cubes["V"].info["excluded"])
        if export_cubes and out is not None:
            for pol, cube in cubes.items():
                io.export_cube(cube, out / f"cube_{pol}.c64", report.config_hash)

    with _stage("range_doppler", timing):
        proc = _processor(setup, proc_cfg.window)
        maps = {}
        for pol in ("H", "V"):
            rd = proc.transform(cubes.pop(pol))
            if setup.dtype == np.complex64:
                rd = rd.replace(rd.values.astype(np.complex64))
            maps[pol] = rd
        del cubes

    k_max = proc_cfg.max_targets
    n_iter = proc_cfg.max_iterations or 3 * k_max
    dop_tol = proc_cfg.multipath_doppler_bins * params.wavelength / (2 * maps["V"].n_doppler
                                                                     * proc.pulse_interval_)
    rng_tol = proc_cfg.multipath_range_bins * params.range_resolution
    for pol in polarizations:
        other = "H" if pol == "V" else "V"
        with _stage(f"clean_{pol}", timing):
            det = CleanDetector(proc, max_iterations=n_iter,
                                stop_threshold_db=proc_cfg.stop_threshold_db,
                                min_snr_db=proc_cfg.min_snr_db,
                                notch_half_width=proc_cfg.notch_half_width).fit(maps[pol])
            found = det.detections_
            notched_other = maps[other]
            notched_other = notch_zero_doppler(notched_other, proc_cfg.notch_half_width)
            for d in found:
                nu = d.doppler * notched_other.n_doppler * notched_other.pulse_interval
                other_amps = measure_cell(notched_other, d.range_bin, nu, proc)
                d.polarization_amplitudes = {pol: _rms(d.antenna_amplitudes),
                                             other: _rms(other_amps)}
            report.clean_status[pol] = {
                "iterations": len(found),
                "diverged": bool(det.diverged_),
                "noise_floor": det.noise_floor_,
                "gate_power": det.gate_power_,
            }
        with _stage(f"music_{pol}", timing):
            grids = []
            for d, rows in zip(found, det.residual_rows_):
                doa = MusicDOA(scene.uca, params.wavenumber, n_sources=1,
                               azimuth_step=proc_cfg.azimuth_step,
                               elevation_step=proc_cfg.elevation_step,
                               method=proc_cfg.music_method)
                doa.fit(_music_snapshots(d, rows, proc_cfg.snapshot_mode, maps[pol]))
                d.azimuth, d.elevation = doa.predict()
                d.spectrum_peak_db = float(10 * np.log10(doa.peak_value(d.azimuth, d.elevation)))
                grids.append(doa.spectrum_)
            if proc_cfg.label_multipath and scene.ground.enabled:
                label_multipath(found, scene.uca.center, rng_tol, dop_tol)
            kept = [i for i, d in enumerate(found) if d.multipath_of is None][:k_max]
            report.detections.extend(found[i] for i in kept)
            report.multipath.extend(d for d in found if d.multipath_of is not None)
        if out is not None:
            with _stage("write_artifacts", timing):
                rd = maps[pol]
                for s, mag in enumerate(det.stages_):
                    path = out / f"rd_map_{pol}_0_{s}.csv"
                    io.write_rd_csv(path, mag, rd.range_axis, rd.doppler_axis, MAP_CSV_ROWS)
                    report.map_paths.append(path.name)
                for rank, i in enumerate(kept):
                    path = out / f"music_{pol}_{rank}.csv"
                    io.write_music_csv(path, grids[i])
                    report.spectrum_paths.append(path.name)
        del det

    if out is not None:
        with _stage("write_artifacts", timing):
            io.write_json(out / "detections.json", report.detection_records())
            io.write_json(out / "report.json", report.to_dict())
    return report
