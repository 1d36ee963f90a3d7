"""Golay complementary sequences and the 802.11ad CEF radar waveform."""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_power_of_two
from .exceptions import InvalidArgumentError, WaveformOverrunError

# Delay/weight vectors of the 802.11ad Golay generator (sequence length 2**len(D)).
IEEE_80211AD_DELAYS = {
    32: (1, 4, 8, 2, 16),
    64: (2, 1, 4, 8, 16, 32),
    128: (1, 8, 2, 4, 16, 32, 64),
}
IEEE_80211AD_WEIGHTS = {
    32: (-1, 1, -1, 1, -1),
    64: (1, 1, -1, -1, 1, -1),
    128: (-1, -1, -1, -1, 1, -1, -1),
}

VARIANTS = ("single_gu", "complementary_pair")


@dataclass(frozen=True)
class GolayPair:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.int64)
        b = np.asarray(self.b, dtype=np.int64)
        if a.shape != b.shape or a.ndim != 1:
            raise InvalidArgumentError("Golay pair members must be 1-D and equal length")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self):
        return self.a.size

    def autocorrelation_sum(self):
        """Aperiodic autocorrelation of a plus that of b (lags -(L-1)..L-1)."""
        return np.correlate(self.a, self.a, "full") + np.correlate(self.b, self.b, "full")

    def is_complementary(self):
        s = self.autocorrelation_sum()
        mid = self.length - 1
        return s[mid] == 2 * self.length and not np.any(np.delete(s, mid))


def _delay_weight_recursion(delays, weights):
    length = 1 << len(delays)
    a = np.zeros(length, dtype=np.int64)
    b = np.zeros(length, dtype=np.int64)
    a[0] = b[0] = 1
    for d, w in zip(delays, weights):
        shifted = np.zeros_like(b)
        shifted[d:] = b[:-d]
        a, b = w * a + shifted, w * a - shifted
    return a, b


def generate_golay_pair(length):
    """Golay complementary pair of the given power-of-two length.

    Lengths 32, 64 and 128 use the 802.11ad generator constants (time-reversed
    output, as in Ga/Gb of the standard).  256 and 512 extend Ga128/Gb128 by
    concatenation so that the 512 pair starts with the CEF's Gu512.  Other
    lengths use plain concatenation (delays 1, 2, 4, ..., unit weights).
    """
    length = check_power_of_two(length)
    if length in IEEE_80211AD_DELAYS:
        a, b = _delay_weight_recursion(IEEE_80211AD_DELAYS[length], IEEE_80211AD_WEIGHTS[length])
        return GolayPair(a[::-1].copy(), b[::-1].copy())
    if length == 256:
        ga, gb = generate_golay_pair(128).a, generate_golay_pair(128).b
        return GolayPair(np.concatenate([gb, ga]), np.concatenate([gb, -ga]))
    if length == 512:
        gu, gu_comp = _cef_blocks(generate_golay_pair(256))
        return GolayPair(gu, gu_comp)
    k = length.bit_length() - 1
    a, b = _delay_weight_recursion([1 << i for i in range(k)], [1] * k)
    return GolayPair(a, b)


def _cef_blocks(pair256):
    # Gu512 = [-Gb128 -Ga128 Gb128 -Ga128] = [-a256, b256]; its aperiodic
    # complement is [-a256, -b256].
    a, b = pair256.a, pair256.b
    return np.concatenate([-a, b]), np.concatenate([-a, -b])


def gv512(pair256):
    """The CEF's second 512 block, [-Gb128 Ga128 -Gb128 -Ga128]."""
    return np.concatenate([-pair256.b, -pair256.a])


@dataclass(frozen=True)
class PulseWaveform:
    """Baseband samples transmitted at the start of each PRI.

    ``samples`` holds the unshaped chips (length ``active_length``); the
    optional ``shaping`` taps model the transmit filter.
    """

    samples: np.ndarray
    shaping: np.ndarray | None = None
    name: str = "gu512"

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128).copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        if self.shaping is not None:
            taps = np.atleast_1d(np.asarray(self.shaping, dtype=np.float64)).copy()
            taps.setflags(write=False)
            object.__setattr__(self, "shaping", taps)

    @property
    def transmitted(self):
        """Chips after the transmit-shaping filter."""
        if self.shaping is None:
            return self.samples
        return np.convolve(self.samples, self.shaping)

    @property
    def active_length(self):
        return self.transmitted.size

    @property
    def energy(self):
        return float(np.sum(np.abs(self.transmitted) ** 2))

    def scaled(self, amplitude):
        return PulseWaveform(self.samples * amplitude, self.shaping, self.name)


def build_cef_waveform(pair256, variant="single_gu", amplitude=1.0, shaping=None):
    """Radar waveform(s) built from the 256-chip pair.

    ``single_gu`` returns one :class:`PulseWaveform` carrying Gu512.
    ``complementary_pair`` returns ``(gu, complement)``; pulse compression
    outputs of the two sum to a sidelobe-free spike.
    """
    if variant not in VARIANTS:
        raise InvalidArgumentError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if pair256.length != 256:
        raise InvalidArgumentError(f"CEF needs a length-256 pair, got {pair256.length}")
    gu, comp = _cef_blocks(pair256)
    first = PulseWaveform(gu * amplitude, shaping, "gu512")
    if variant == "single_gu":
        return first
    return first, PulseWaveform(comp * amplitude, shaping, "gu512_complement")


def default_waveforms(variant="single_gu", amplitude=1.0, shaping=None):
    """Tuple of per-packet waveforms (length 1 or 2, cycled over slow time)."""
    out = build_cef_waveform(generate_golay_pair(256), variant, amplitude, shaping)
    return out if isinstance(out, tuple) else (out,)


def assemble_pri(waveform, params):
    """Place the waveform at the start of a P-sample fast-time vector."""
    n_fast = params.n_fast
    tx = waveform.transmitted
    if tx.size > n_fast:
        raise WaveformOverrunError(
            f"waveform of {tx.size} samples does not fit in P = {n_fast}"
        )
    out = np.zeros(n_fast, dtype=np.complex128)
    out[: tx.size] = tx
    return out


def raised_cosine_taps(rolloff=0.25, span=8, samples_per_chip=1):
    """Raised-cosine shaping taps, normalised to unit DC gain."""
    if not 0 <= rolloff <= 1:
        raise InvalidArgumentError("rolloff must lie in [0, 1]")
    t = np.arange(-span * samples_per_chip, span * samples_per_chip + 1) / samples_per_chip
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.sinc(t) * np.cos(np.pi * rolloff * t) / (1 - (2 * rolloff * t) ** 2)
    if rolloff > 0:
        edge = np.isclose(np.abs(t), 1 / (2 * rolloff))
        h[edge] = np.pi / 4 * np.sinc(1 / (2 * rolloff))
    return h / h.sum()


def export_sequence_csv(sequence, path):
    np.savetxt(path, np.asarray(sequence, dtype=np.int64), fmt="%d")
