"""Radar timing/carrier constants and the quantities derived from them."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.constants import speed_of_light

from .exceptions import InvalidArgumentError

CEF_ACTIVE_LENGTH = 512


@dataclass(frozen=True)
class RadarParams:
    """Carrier, bandwidth and timing of the 802.11ad radar.

    Sampling runs at the channel bandwidth (``T_s = 1 / bandwidth``).
    ``fast_time_window`` optionally records only the first P samples of each
    PRI (a receive range gate); ``None`` records the whole PRI.
    """

    carrier_frequency: float = 60e9
    bandwidth: float = 1.76e9
    pri: float = 2e-6
    cpi: float = 4e-3
    energy_per_sample: float = 1.0
    fast_time_window: int | None = None
    c: float = speed_of_light

    def __post_init__(self):
        for name in ("carrier_frequency", "bandwidth", "pri", "cpi", "energy_per_sample", "c"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidArgumentError(f"{name} must be positive, got {value}")
        if self.n_packets < 1:
            raise InvalidArgumentError("cpi shorter than one pri")
        if self.fast_time_window is not None:
            if self.fast_time_window < 1 or self.fast_time_window > self.samples_per_pri:
                raise InvalidArgumentError(
                    f"fast_time_window must be in [1, {self.samples_per_pri}], "
                    f"got {self.fast_time_window}"
                )

    @cached_property
    def wavelength(self):
        return self.c / self.carrier_frequency

    @cached_property
    def wavenumber(self):
        return 2 * np.pi / self.wavelength

    @property
    def sample_rate(self):
        return self.bandwidth

    @property
    def sample_period(self):
        return 1.0 / self.bandwidth

    @cached_property
    def samples_per_pri(self):
        return int(round(self.pri * self.bandwidth))

    @property
    def n_fast(self):
        """P: fast-time samples per packet held in the data cube."""
        if self.fast_time_window is None:
            return self.samples_per_pri
        return int(self.fast_time_window)

    @cached_property
    def n_packets(self):
        """Q: packets per coherent processing interval."""
        return int(round(self.cpi / self.pri))

    @property
    def amplitude(self):
        return float(np.sqrt(self.energy_per_sample))

    @property
    def range_resolution(self):
        return self.c / (2 * self.bandwidth)

    @property
    def doppler_resolution(self):
        return 1.0 / (self.n_packets * self.pri)

    @property
    def velocity_resolution(self):
        return self.wavelength / (2 * self.n_packets * self.pri)

    @property
    def max_unambiguous_velocity(self):
        return self.wavelength / (4 * self.pri)

    @property
    def max_range(self):
        """Unambiguous range of the 512-sample correlation window."""
        return CEF_ACTIVE_LENGTH * self.range_resolution

    @property
    def max_pri_range(self):
        return self.samples_per_pri * self.range_resolution

    def doppler_to_velocity(self, doppler):
        return np.asarray(doppler) * self.wavelength / 2

    def velocity_to_doppler(self, velocity):
        return 2 * np.asarray(velocity) / self.wavelength


def derive_params(carrier_frequency, bandwidth, pri, cpi, c=speed_of_light):
    """Derived radar quantities for the given inputs, as a plain dict."""
    for name, value in (("carrier_frequency", carrier_frequency), ("bandwidth", bandwidth),
                        ("pri", pri), ("cpi", cpi)):
        if not value > 0:
            raise InvalidArgumentError(f"{name} must be positive, got {value}")
    p = RadarParams(carrier_frequency=carrier_frequency, bandwidth=bandwidth,
                    pri=pri, cpi=cpi, c=c)
    return {
        "wavelength": p.wavelength,
        "wavenumber": p.wavenumber,
        "sample_period": p.sample_period,
        "P": p.samples_per_pri,
        "Q": p.n_packets,
        "range_resolution": p.range_resolution,
        "velocity_resolution": p.velocity_resolution,
        "doppler_resolution": p.doppler_resolution,
        "max_unambiguous_velocity": p.max_unambiguous_velocity,
        "max_range": p.max_range,
    }
