"""Pulse compression, Doppler processing and CLEAN target extraction."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy.optimize import minimize_scalar
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_cube
from .channel import DataCube
from .exceptions import CleanDivergenceError, DimensionError, InvalidArgumentError
from .waveform import PulseWaveform

log = logging.getLogger(__name__)

MIN_VISIBLE_FRACTION = 0.5


@dataclass
class RangeDopplerMap:
    """Complex range-Doppler surfaces for a set of antennas.

    ``values`` has shape (antennas, range bins, Doppler bins); the Doppler
    axis is FFT-shifted so 0 Hz sits at index ``n_doppler // 2``.
    """

    values: np.ndarray
    range_axis: np.ndarray
    doppler_axis: np.ndarray
    wavelength: float
    pulse_interval: float
    polarization: str = "V"
    antenna_indices: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.ndim != 3:
            raise DimensionError("map values must be (antennas, range, doppler)")
        if not self.antenna_indices:
            self.antenna_indices = tuple(range(self.values.shape[0]))

    @property
    def n_range(self):
        return self.values.shape[1]

    @property
    def n_doppler(self):
        return self.values.shape[2]

    @property
    def zero_doppler_index(self):
        return self.n_doppler // 2

    @property
    def velocity_axis(self):
        return self.doppler_axis * self.wavelength / 2

    def power(self):
        """Antenna-averaged power per cell."""
        return np.mean(np.abs(self.values) ** 2, axis=0)

    def replace(self, values, **meta):
        return RangeDopplerMap(values, self.range_axis, self.doppler_axis, self.wavelength,
                               self.pulse_interval, self.polarization, self.antenna_indices,
                               {**self.meta, **meta})


def _reference_samples(reference):
    if isinstance(reference, PulseWaveform):
        return reference.transmitted
    return np.asarray(reference, dtype=np.complex128)


def matched_filter_fast_time(cube, reference):
    """Circular cross-correlation of every fast-time vector with ``reference``.

    ``cube`` is an (N, P, Q) array or :class:`DataCube`; output has the same
    shape, with lag ``l`` of the correlation stored at fast-time index ``l``.
    """
    samples = cube.samples if isinstance(cube, DataCube) else cube
    samples = check_cube(samples)
    ref = _reference_samples(reference)
    n_fast = samples.shape[1]
    if ref.size > n_fast:
        raise DimensionError(f"reference of {ref.size} samples exceeds P = {n_fast}")
    ref_spec = np.conj(sfft.fft(ref, n_fast)).astype(samples.dtype)
    spec = sfft.fft(samples, axis=1)
    spec *= ref_spec[None, :, None]
    return sfft.ifft(spec, axis=1, overwrite_x=True)


def slow_time_window(n, window):
    if window in (None, "none"):
        return np.ones(n)
    if window == "hann":
        return np.hanning(n)
    raise InvalidArgumentError(f"unknown slow-time window {window!r}")


def doppler_fft(compressed, pulse_interval, window=None):
    """Slow-time FFT (orthonormal, FFT-shifted) of a range-compressed cube."""
    compressed = check_cube(compressed, name="compressed cube")
    n_pkt = compressed.shape[2]
    if n_pkt < 2:
        raise DimensionError("Doppler processing needs at least two packets")
    w = slow_time_window(n_pkt, window).astype(compressed.real.dtype)
    data = compressed * w if window not in (None, "none") else compressed
    values = sfft.fftshift(sfft.fft(data, axis=2, norm="ortho"), axes=2)
    doppler_axis = sfft.fftshift(sfft.fftfreq(n_pkt, pulse_interval))
    return values, doppler_axis


def notch_zero_doppler(rd_map, half_width_bins=1):
    """Zero every Doppler bin within ``half_width_bins`` of 0 Hz."""
    if half_width_bins < 0:
        raise InvalidArgumentError("half_width_bins must be >= 0")
    values = rd_map.values.copy()
    z = rd_map.zero_doppler_index
    lo, hi = max(0, z - half_width_bins), min(rd_map.n_doppler, z + half_width_bins + 1)
    pre_peak = float(np.max(np.abs(rd_map.values) ** 2)) if values.size else 0.0
    values[:, :, lo:hi] = 0
    return rd_map.replace(values, notch_half_width=half_width_bins, pre_notch_peak_power=pre_peak)


def bin_to_physical(range_bin, doppler_bin, params, n_range=None, n_doppler=None,
                    pulse_interval=None):
    """(range m, Doppler Hz, velocity m/s) for a (range, shifted Doppler) bin."""
    n_range = params.n_fast if n_range is None else n_range
    n_doppler = params.n_packets if n_doppler is None else n_doppler
    pulse_interval = params.pri if pulse_interval is None else pulse_interval
    if not 0 <= range_bin < n_range or not 0 <= doppler_bin < n_doppler:
        raise IndexError(f"bin ({range_bin}, {doppler_bin}) outside a {n_range}x{n_doppler} map")
    rng = range_bin * params.c * params.sample_period / 2
    doppler = (doppler_bin - n_doppler // 2) / (n_doppler * pulse_interval)
    return rng, doppler, doppler * params.wavelength / 2


class RangeDopplerProcessor(TransformerMixin, BaseEstimator):
    """Turns data cubes into per-antenna range-Doppler maps.

    Parameters
    ----------
    references : PulseWaveform or tuple of PulseWaveform
        One reference for single-sequence compression; two references for
        complementary-pair operation (packets alternate between them and
        consecutive pairs are summed, halving the slow-time rate).
    params : RadarParams
    window : {"none", "hann"}
        Slow-time taper applied before the Doppler FFT.
    """

    def __init__(self, references=None, params=None, window="none"):
        self.references = references
        self.params = params
        self.window = window

    def _refs(self):
        refs = self.references
        if refs is None:
            raise InvalidArgumentError("references must be provided")
        return refs if isinstance(refs, tuple) else (refs,)

    def fit(self, X=None, y=None):
        refs = self._refs()
        if len(refs) not in (1, 2):
            raise InvalidArgumentError("expected one reference or a complementary pair")
        n_fast = self.params.n_fast
        if X is not None:
            samples = X.samples if isinstance(X, DataCube) else X
            n_fast = check_cube(samples).shape[1]
        slow_time_window(2, self.window)
        self.n_fast_ = n_fast
        self.pulse_interval_ = self.params.pri * len(refs)
        unit = np.zeros((1, n_fast, len(refs)), dtype=complex)
        for i, ref in enumerate(refs):
            tx = _reference_samples(ref)
            unit[0, : tx.size, i] = tx
        resp = self.compress(unit)[0, :, 0]
        self.range_response_ = resp / resp[0]
        self.reference_energy_ = float(np.abs(resp[0]))
        return self

    def compress(self, X):
        """Matched filtering only; complementary mode also sums packet pairs."""
        samples = X.samples if isinstance(X, DataCube) else X
        samples = check_cube(samples)
        refs = self._refs()
        if len(refs) == 1:
            return matched_filter_fast_time(samples, refs[0])
        n_pairs = samples.shape[2] // 2
        even = matched_filter_fast_time(samples[:, :, 0:2 * n_pairs:2], refs[0])
        even += matched_filter_fast_time(samples[:, :, 1:2 * n_pairs:2], refs[1])
        return even

    def transform(self, X):
        check_is_fitted(self, "range_response_")
        polarization = X.polarization if isinstance(X, DataCube) else "V"
        compressed = self.compress(X)
        if compressed.shape[1] != self.n_fast_:
            raise DimensionError(f"cube has P = {compressed.shape[1]}, processor fitted for {self.n_fast_}")
        values, doppler_axis = doppler_fft(compressed, self.pulse_interval_, self.window)
        del compressed
        range_axis = np.arange(self.n_fast_) * self.params.c * self.params.sample_period / 2
        return RangeDopplerMap(values, range_axis, doppler_axis, self.params.wavelength,
                               self.pulse_interval_, polarization)

    def doppler_response(self, nu, n_doppler):
        """Map-domain response of a unit slow-time tone at ``nu`` bins from 0 Hz."""
        q = np.arange(n_doppler)
        tone = np.exp(2j * np.pi * nu * q / n_doppler) * slow_time_window(n_doppler, self.window)
        return sfft.fftshift(sfft.fft(tone, norm="ortho"))


@dataclass
class Detection:
    """One CLEAN extraction, later completed with angles by MUSIC."""

    amplitude: complex
    range: float
    doppler: float
    velocity: float
    range_bin: int
    doppler_bin: int
    polarization: str
    power_db: float
    azimuth: float | None = None
    elevation: float | None = None
    polarization_amplitudes: dict = field(default_factory=dict)
    antenna_amplitudes: np.ndarray | None = field(default=None, repr=False)
    doppler_offset: float = 0.0
    multipath_of: int | None = None
    spectrum_peak_db: float | None = None

    def to_record(self):
        rec = {
            "polarization": self.polarization,
            "range_m": self.range,
            "doppler_hz": self.doppler,
            "velocity_mps": self.velocity,
            "azimuth_deg": self.azimuth,
            "elevation_deg": self.elevation,
            "amplitude": [float(np.real(self.amplitude)), float(np.imag(self.amplitude))],
            "power_db": self.power_db,
            "polarization_amplitudes": dict(self.polarization_amplitudes),
            "range_bin": int(self.range_bin),
            "doppler_bin": int(self.doppler_bin),
            "multipath_of": self.multipath_of,
        }
        if self.spectrum_peak_db is not None:
            rec["music_peak_db"] = self.spectrum_peak_db
        return rec


def slow_time_rows(rows):
    """Invert the shifted orthonormal Doppler FFT along the last axis."""
    return sfft.ifft(sfft.ifftshift(rows, axes=-1), axis=-1, norm="ortho")


def _notch_mask(rd_map):
    mask = np.ones(rd_map.n_doppler, dtype=bool)
    hw = rd_map.meta.get("notch_half_width")
    if hw is not None:
        z = rd_map.zero_doppler_index
        mask[max(0, z - hw):z + hw + 1] = False
    return mask


def _antenna_mean_power(values):
    acc = np.zeros(values.shape[1:], dtype=np.float64)
    for v in values:
        acc += v.real.astype(np.float64) ** 2 + v.imag.astype(np.float64) ** 2
    return acc / values.shape[0]


def _tone_fit(rows, pattern, mask):
    """Least-squares amplitudes of ``pattern`` in each row over unmasked bins."""
    pat = pattern * mask
    norm = float(np.vdot(pat, pat).real)
    if norm == 0:
        return np.zeros(rows.shape[0], dtype=complex), 0.0
    proj = rows @ np.conj(pat)
    return proj / norm, float(np.sum(np.abs(proj) ** 2) / norm)


class CleanDetector(BaseEstimator):
    """Iterative peak-pick-and-subtract extraction of point targets.

    The peak is searched on the antenna-averaged power of the residual map.
    Its point-spread response comes from ``processor`` (the same matched
    filter and Doppler transform that produced the map), placed at the peak's
    range bin and at a sub-bin Doppler offset when ``refine`` is set, and is
    subtracted from every antenna with that antenna's complex amplitude.

    Iteration stops after ``max_iterations``, when the residual peak drops
    below ``stop_threshold_db`` relative to the first peak, or when it is not
    ``min_snr_db`` above the estimated noise floor.
    """

    def __init__(self, processor=None, max_iterations=3, stop_threshold_db=-30.0,
                 min_snr_db=16.0, notch_half_width=1, refine=True, keep_stages=True,
                 stage_antenna=0, numeric_floor_db=-150.0, strict=False):
        self.processor = processor
        self.max_iterations = max_iterations
        self.stop_threshold_db = stop_threshold_db
        self.min_snr_db = min_snr_db
        self.notch_half_width = notch_half_width
        self.refine = refine
        self.keep_stages = keep_stages
        self.stage_antenna = stage_antenna
        self.numeric_floor_db = numeric_floor_db
        self.strict = strict

    def _range_response(self, n_range):
        if self.processor is not None:
            check_is_fitted(self.processor, "range_response_")
            resp = self.processor.range_response_
            if resp.size != n_range:
                raise DimensionError("processor and map disagree on range bins")
            return resp
        resp = np.zeros(n_range, dtype=complex)
        resp[0] = 1.0
        return resp

    def _doppler_response(self, nu, n_doppler):
        if self.processor is not None:
            return self.processor.doppler_response(nu, n_doppler)
        return RangeDopplerProcessor(window="none").doppler_response(nu, n_doppler)

    def fit(self, X, y=None):
        if self.max_iterations < 1:
            raise InvalidArgumentError("max_iterations must be >= 1")
        rd_map = X
        if self.notch_half_width is not None:
            rd_map = notch_zero_doppler(rd_map, self.notch_half_width)
        ref_power = rd_map.meta.get("pre_notch_peak_power",
                                    float(np.max(np.abs(rd_map.values) ** 2)))
        # keep the map's precision (complex64 for full-scale cubes) to bound memory
        resid = rd_map.values.astype(np.promote_types(rd_map.values.dtype, np.complex64))
        n_ant, n_range, n_dop = resid.shape
        range_resp = self._range_response(n_range)
        mask = _notch_mask(rd_map)
        zero = n_dop // 2

        cell_power = np.empty(resid.shape, dtype=np.float32)
        for n in range(n_ant):
            cell_power[n] = resid[n].real ** 2 + resid[n].imag ** 2
        nonzero = cell_power[cell_power > 0]
        del cell_power
        # median of an exponential variate is ln2 times its mean
        noise_floor = (float(np.median(nonzero, overwrite_input=True)) / np.log(2)
                       if nonzero.size else 0.0)
        del nonzero
        gate = max(noise_floor * 10 ** (self.min_snr_db / 10),
                   ref_power * 10 ** (self.numeric_floor_db / 10))
        self.noise_floor_ = noise_floor
        self.gate_power_ = gate

        detections, stages, rows, peaks = [], [], [], []
        first = prev = None
        self.diverged_ = False
        for _ in range(self.max_iterations):
            power = _antenna_mean_power(resid)
            r, d = np.unravel_index(int(np.argmax(power)), power.shape)
            peak = float(power[r, d])
            if peak <= 0 or peak < gate:
                break
            if first is None:
                first = peak
            elif peak < first * 10 ** (self.stop_threshold_db / 10):
                break
            if prev is not None and peak >= prev:
                self.diverged_ = True
                msg = f"CLEAN residual peak rose from {prev:.3e} to {peak:.3e}; halted"
                if self.strict:
                    raise CleanDivergenceError(msg)
                log.warning(msg)
                break
            if self.keep_stages:
                stages.append(np.abs(resid[self.stage_antenna]).astype(np.float32))
            peaks.append(peak)
            row = resid[:, r, :].copy()
            nu0 = float(d - zero)
            nu = self._refine(row, nu0, n_dop, mask) if self.refine else nu0
            pattern = self._doppler_response(nu, n_dop)
            amps, _ = _tone_fit(row, pattern, mask)
            rows.append(row)
            psf = np.outer(np.roll(range_resp, r), pattern)
            for n in range(n_ant):
                resid[n] -= amps[n] * psf
            del psf
            resid[:, :, ~mask] = 0
            doppler = nu / (n_dop * rd_map.pulse_interval)
            detections.append(Detection(
                amplitude=complex(amps[0]),
                range=float(rd_map.range_axis[r]),
                doppler=float(doppler),
                velocity=float(doppler * rd_map.wavelength / 2),
                range_bin=int(r),
                doppler_bin=int(d),
                polarization=rd_map.polarization,
                power_db=float(10 * np.log10(np.mean(np.abs(amps) ** 2))),
                antenna_amplitudes=amps,
                doppler_offset=nu - nu0,
            ))
            prev = peak
        if self.keep_stages:
            stages.append(np.abs(resid[self.stage_antenna]).astype(np.float32))
        self.detections_ = detections
        self.residual_ = rd_map.replace(resid)
        self.stages_ = stages
        self.residual_rows_ = rows
        self.peak_powers_ = peaks
        return self

    def _refine(self, row, nu0, n_dop, mask):
        def cost(nu):
            pattern = self._doppler_response(nu, n_dop)
            # a tone mostly hidden by the notch gives an ill-conditioned amplitude
            if np.sum(np.abs(pattern[mask]) ** 2) < MIN_VISIBLE_FRACTION * np.sum(np.abs(pattern) ** 2):
                return 0.0
            return -_tone_fit(row, pattern, mask)[1]

        res = minimize_scalar(cost, bounds=(nu0 - 1.0, nu0 + 1.0), method="bounded",
                              options={"xatol": 1e-5})
        return float(res.x) if res.fun <= cost(nu0) else nu0

    def predict(self, X):
        return self.fit(X).detections_


def clean(rd_map, max_iterations=3, stop_threshold_db=-30.0, processor=None, **kwargs):
    """Functional wrapper around :class:`CleanDetector`; returns detections."""
    det = CleanDetector(processor=processor, max_iterations=max_iterations,
                        stop_threshold_db=stop_threshold_db, **kwargs)
    return det.fit(rd_map).detections_


def measure_cell(rd_map, range_bin, nu, processor=None):
    """Per-antenna complex amplitudes of a tone at (range_bin, nu) in a map."""
    proc = processor if processor is not None else RangeDopplerProcessor(window="none")
    pattern = proc.doppler_response(nu, rd_map.n_doppler)
    return _tone_fit(rd_map.values[:, range_bin, :], pattern, _notch_mask(rd_map))[0]
