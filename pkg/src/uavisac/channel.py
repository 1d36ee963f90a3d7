"""Two-ray polarimetric propagation and received data-cube synthesis."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .exceptions import InvalidArgumentError, InvalidGeometryError
from .geometry import target_position_at, uca_positions

log = logging.getLogger(__name__)

POLARIZATIONS = ("H", "V")
_FOUR_PI_ROOT = np.sqrt(4 * np.pi)
_SINC_HALF_SPAN = 8


@dataclass(frozen=True)
class PathPair:
    r_direct: float
    r_reflected: float
    grazing_angle: float


def path_pair(element, scatterer):
    """Direct and image-method ground-bounce lengths between two points.

    Works on broadcastable arrays of shape (..., 3); returns arrays.
    """
    element = np.asarray(element, dtype=float)
    scatterer = np.asarray(scatterer, dtype=float)
    image = scatterer * np.array([1.0, 1.0, -1.0])
    r_direct = np.linalg.norm(scatterer - element, axis=-1)
    r_reflected = np.linalg.norm(image - element, axis=-1)
    grazing = np.arcsin(np.clip((element[..., 2] + scatterer[..., 2]) / r_reflected, -1, 1))
    return r_direct, r_reflected, grazing


def fresnel_gamma(grazing_angle, ground):
    """(gamma_h, gamma_v) for a grazing angle in radians (array-friendly).

    H is the perpendicular (TE) and V the parallel (TM) polarisation.
    """
    if ground.mode == "fixed":
        shape = np.shape(grazing_angle)
        return (np.full(shape, complex(ground.fixed_gamma_h)),
                np.full(shape, complex(ground.fixed_gamma_v)))
    psi = np.asarray(grazing_angle, dtype=float)
    eps = complex(ground.relative_permittivity)
    sin_psi = np.sin(psi)
    root = np.sqrt(eps - np.cos(psi) ** 2 + 0j)
    gamma_h = (sin_psi - root) / (sin_psi + root)
    gamma_v = (eps * sin_psi - root) / (eps * sin_psi + root)
    return gamma_h, gamma_v


def propagation_gain(path, gamma, k):
    """Narrowband one-way two-ray gain for a :class:`PathPair`."""
    if not path.r_direct > 0:
        raise InvalidGeometryError(f"direct path length must be positive, got {path.r_direct}")
    direct = np.exp(-1j * k * path.r_direct) / (_FOUR_PI_ROOT * path.r_direct)
    if gamma == 0:
        return complex(direct)
    bounce = gamma * np.exp(-1j * k * path.r_reflected) / (_FOUR_PI_ROOT * path.r_reflected)
    return complex(direct + bounce)


@dataclass(frozen=True)
class NoiseModel:
    noise_power: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.noise_power >= 0:
            raise InvalidArgumentError("noise_power must be >= 0")


@dataclass
class DataCube:
    """Complex baseband samples, shape (N antennas, P fast time, Q slow time)."""

    samples: np.ndarray
    polarization: str
    params: object
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples.ndim != 3:
            raise InvalidArgumentError("cube samples must be N x P x Q")
        if self.polarization not in POLARIZATIONS:
            raise InvalidArgumentError(f"polarization must be H or V, got {self.polarization!r}")

    @property
    def shape(self):
        return self.samples.shape


def _leg_terms(elements, points, k, ground):
    """Per-leg lengths and complex gains.

    ``elements`` (N, 3), ``points`` (..., 3).  Returns lengths (..., N, 2) for
    (direct, reflected) legs and gains (..., N, 2, 2) indexed by leg then
    polarisation (H, V).
    """
    pts = np.asarray(points)[..., None, :]
    r_d, r_r, psi = path_pair(elements, pts)
    lengths = np.stack([r_d, r_r], axis=-1)
    spread = np.exp(-1j * k * lengths) / (_FOUR_PI_ROOT * lengths)
    gains = np.empty(lengths.shape + (2,), dtype=complex)
    gains[..., 0, :] = spread[..., 0, None]
    if ground.enabled:
        g_h, g_v = fresnel_gamma(psi, ground)
        gains[..., 1, 0] = spread[..., 1] * g_h
        gains[..., 1, 1] = spread[..., 1] * g_v
    else:
        gains[..., 1, :] = 0.0
    return lengths, gains


def _incident_scatter(tx_gains, geometry, scattering):
    """Field scattered toward each receive polarisation, per tx element and leg.

    tx_gains (..., N, 2, 2[p_inc]) -> (..., N, 2, 2[p_rx]).
    """
    xi = np.array([geometry.element_pattern_h, geometry.element_pattern_v])
    inc = tx_gains * (geometry.beam_weights[:, None, None] * xi)
    return np.einsum("rp,...p->...r", scattering, inc)


class _Scatterer:
    """Precomputed transmit-side terms for one scatterer."""

    def __init__(self, points, scattering, elements, geometry, k, ground):
        self.lengths, self.gains = _leg_terms(elements, points, k, ground)
        self.scattered = _incident_scatter(self.gains, geometry, np.asarray(scattering))


def _delay_taps(delay_samples, interpolation):
    """Integer sample indices and weights for fractional delays."""
    if interpolation == "nearest":
        return np.rint(delay_samples).astype(np.int64)[..., None], None
    base = np.floor(delay_samples).astype(np.int64)
    offs = np.arange(-_SINC_HALF_SPAN + 1, _SINC_HALF_SPAN + 1)
    idx = base[..., None] + offs
    x = idx - delay_samples[..., None]
    win = 0.5 + 0.5 * np.cos(np.pi * x / _SINC_HALF_SPAN)
    return idx, np.sinc(x) * win


def synthesize_datacube(scene, params, waveform, noise=None, *, interpolation="nearest",
                        dtype=np.complex128):
    """Received (H, V) data cubes for a scene.

    Stop-and-go: geometry is frozen within a packet and advances by one PRI
    between packets.  Every (tx element, tx leg, rx element, rx leg) path
    deposits the transmitted waveform at its own round-trip delay.
    ``waveform`` may be a tuple of waveforms cycled across packets.
    """
    if interpolation not in ("nearest", "sinc"):
        raise InvalidArgumentError(f"interpolation must be 'nearest' or 'sinc', got {interpolation!r}")
    waves = waveform if isinstance(waveform, tuple) else (waveform,)
    geometry = scene.uca
    elements = uca_positions(geometry)
    n_ant, n_fast, n_pkt = geometry.n_elements, params.n_fast, params.n_packets
    k = params.wavenumber
    fs_over_c = params.sample_rate / params.c
    rx_const = params.amplitude * params.wavelength / _FOUR_PI_ROOT
    xi = np.array([geometry.element_pattern_h, geometry.element_pattern_v])
    times = np.arange(n_pkt) * params.pri

    excluded = []
    moving, static_pts, static_scat = [], [], []
    for idx, tgt in enumerate(scene.targets):
        if tgt.radial_speed == 0:
            static_pts.append(target_position_at(tgt, 0.0, geometry.center))
            static_scat.append(tgt.rcs.scattering_matrix())
        else:
            pts = target_position_at(tgt, times, geometry.center)
            if np.any(pts[:, 2] <= 0):
                raise InvalidGeometryError(f"target {idx} is below the ground plane")
            moving.append((f"target{idx}", _Scatterer(pts, tgt.rcs.scattering_matrix(),
                                                      elements, geometry, k, scene.ground)))
    for c in scene.clutter:
        static_pts.append(np.asarray(c.position, dtype=float))
        static_scat.append(c.rcs.scattering_matrix())
    static = None
    if static_pts:
        pts = np.asarray(static_pts)
        if np.any(pts[:, 2] < 0):
            raise InvalidGeometryError("static scatterer below the ground plane")
        lengths, gains = _leg_terms(elements, pts, k, scene.ground)
        # ground-level clutter: the image path coincides with the direct one
        gains[len(pts) - len(scene.clutter):, :, 1, :] = 0.0
        scattered = np.einsum("mrp,mnlp->mnlr", np.asarray(static_scat),
                              gains * (geometry.beam_weights[:, None, None] * xi))
        static = (lengths, gains, scattered)

    wave_len = max(w.active_length for w in waves)
    nfft = sfft.next_fast_len(n_fast + wave_len - 1)
    wave_spec = [sfft.fft(w.transmitted, nfft) for w in waves]

    out = np.zeros((2, n_ant, n_fast, n_pkt), dtype=dtype)
    for n in range(n_ant):
        h = np.zeros((2, n_pkt, n_fast), dtype=complex)
        for name, sc in moving:
            # monostatic: the receive leg reuses element n's transmit-leg terms
            rx_len = sc.lengths[:, n, :]                             # (Q, 2)
            rx_gain = sc.gains[:, n]                                 # (Q, 2, 2)
            delay = (sc.lengths[:, :, :, None] + rx_len[:, None, None, :]) * fs_over_c
            amp = (sc.scattered[:, :, :, None, :] * rx_gain[:, None, None, :, :]
                   * xi * rx_const)                                  # (Q, N', 2, 2, pol)
            q_index = np.broadcast_to(np.arange(n_pkt)[:, None, None, None], delay.shape)
            if not _deposit(h, q_index, delay, amp, interpolation, n_fast) and n == 0:
                excluded.append(name)
                log.info("%s lies beyond the fast-time window; excluded", name)
        if static is not None:
            lengths, gains, scattered = static
            rx_gain = gains[:, n]
            delay = (lengths[:, :, :, None] + lengths[:, n, None, None, :]) * fs_over_c
            amp = scattered[:, :, :, None, :] * rx_gain[:, None, None, :, :] * xi * rx_const
            h_static = np.zeros((2, 1, n_fast), dtype=complex)
            if not _deposit(h_static, np.zeros(delay.shape, dtype=np.int64), delay, amp,
                            interpolation, n_fast) and n == 0:
                excluded.append("static")
            h += h_static
        spec = sfft.fft(h, nfft, axis=-1)
        for w_idx, ws in enumerate(wave_spec):
            sl = slice(w_idx, None, len(wave_spec))
            sig = sfft.ifft(spec[:, sl, :] * ws, axis=-1)[..., :n_fast]
            out[:, n, :, sl] = np.swapaxes(sig, 1, 2)

    if noise is not None and noise.noise_power > 0:
        scale = np.sqrt(noise.noise_power / 2)
        for p in range(2):
            for n in range(n_ant):
                rng = np.random.default_rng(np.random.SeedSequence(noise.seed, spawn_key=(p, n)))
                draw = rng.standard_normal((2, n_fast, n_pkt))
                out[p, n] += (scale * (draw[0] + 1j * draw[1])).astype(dtype)

    info = {"excluded": excluded, "interpolation": interpolation}
    return (DataCube(out[0], "H", params, dict(info)), DataCube(out[1], "V", params, dict(info)))


def _deposit(h, q_index, delay, amp, interpolation, n_fast):
    """Accumulate path impulses into h (2, Q, P); False if nothing landed."""
    idx, weights = _delay_taps(delay, interpolation)
    if weights is None:
        amp_t = amp
    else:
        amp_t = amp[..., None, :] * weights[..., None]
        q_index = np.broadcast_to(q_index[..., None], idx.shape)
    if weights is None:
        idx = idx[..., 0]
    keep = (idx >= 0) & (idx < n_fast)
    if not np.any(keep):
        return False
    flat = (q_index[keep] * n_fast + idx[keep])
    size = h.shape[1] * n_fast
    vals = amp_t[keep]
    for p in range(2):
        re = np.bincount(flat, weights=vals[:, p].real, minlength=size)
        im = np.bincount(flat, weights=vals[:, p].imag, minlength=size)
        h[p] += (re + 1j * im).reshape(h.shape[1], n_fast)
    return True


def noise_only_cube(params, n_elements, noise, polarization="V", dtype=np.complex128):
    """A cube holding only receiver noise (same seeding as synthesis)."""
    p = POLARIZATIONS.index(polarization)
    out = np.zeros((n_elements, params.n_fast, params.n_packets), dtype=dtype)
    scale = np.sqrt(noise.noise_power / 2)
    for n in range(n_elements):
        rng = np.random.default_rng(np.random.SeedSequence(noise.seed, spawn_key=(p, n)))
        draw = rng.standard_normal((2, params.n_fast, params.n_packets))
        out[n] = scale * (draw[0] + 1j * draw[1])
    return DataCube(out, polarization, params)
