"""Joint azimuth-elevation MUSIC over the UAV circular array."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_snapshots
from .exceptions import DimensionError, InvalidArgumentError

DENOMINATOR_FLOOR = 1e-18


@dataclass
class SnapshotMatrix:
    columns: np.ndarray
    mode: str = "doppler_bin"

    def __post_init__(self):
        self.columns = check_snapshots(self.columns)

    @property
    def count(self):
        return self.columns.shape[1]


@dataclass
class MusicGrid:
    spectrum: np.ndarray        # (n_azimuth, n_elevation)
    azimuth_grid: np.ndarray    # degrees
    elevation_grid: np.ndarray  # degrees
    near_singular: bool = False

    def argmax(self):
        i, j = np.unravel_index(int(np.argmax(self.spectrum)), self.spectrum.shape)
        return float(self.azimuth_grid[i]), float(self.elevation_grid[j])

    def to_db(self):
        return 10 * np.log10(self.spectrum / np.max(self.spectrum))


def gather_snapshots(compressed, detection, mode="doppler_bin", pulse_interval=None):
    """Array snapshots for one detection.

    ``doppler_bin`` returns the single N-vector at the detection's
    (range, Doppler) cell; ``compressed`` must then be the per-antenna
    range-Doppler values (N, R, D).  ``slow_time`` takes the range-compressed
    slow-time samples (N, P, Q) at the detection's range bin and removes the
    detection's Doppler phase progression, giving Q snapshots.
    """
    data = np.asarray(compressed)
    if data.ndim != 3:
        raise DimensionError("expected per-antenna data of shape (N, range, time-or-doppler)")
    if not 0 <= detection.range_bin < data.shape[1]:
        raise DimensionError("detection range bin outside the data")
    if mode == "doppler_bin":
        return SnapshotMatrix(data[:, detection.range_bin, detection.doppler_bin][:, None], mode)
    if mode == "slow_time":
        if pulse_interval is None:
            raise InvalidArgumentError("slow_time mode needs the pulse interval")
        return doppler_compensated(data[:, detection.range_bin, :], detection.doppler,
                                   pulse_interval)
    raise InvalidArgumentError(f"unknown snapshot mode {mode!r}")


def doppler_compensated(slow_time, doppler, pulse_interval):
    """Slow-time samples (N, Q) with the target's Doppler phase removed."""
    x = np.asarray(slow_time)
    q = np.arange(x.shape[-1])
    return SnapshotMatrix(x * np.exp(-2j * np.pi * doppler * q * pulse_interval), "slow_time")


def covariance(snapshots):
    x = snapshots.columns if isinstance(snapshots, SnapshotMatrix) else check_snapshots(snapshots)
    cov = x @ x.conj().T / x.shape[1]
    return (cov + cov.conj().T) / 2


def _qr_eigh(cov, tol=1e-13, max_iter=5000):
    """Hermitian eigen-decomposition by shifted QR iteration (ascending order)."""
    n = cov.shape[0]
    a = cov.astype(complex).copy()
    vecs = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(cov), np.finfo(float).tiny)
    for _ in range(max_iter):
        mu = a[-1, -1]
        q, r = np.linalg.qr(a - mu * np.eye(n))
        a = r @ q + mu * np.eye(n)
        vecs = vecs @ q
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
    vals = np.real(np.diag(a))
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


def noise_subspace(cov, n_sources=1, method="eigh"):
    """Orthonormal basis (N, N - S) of the noise subspace."""
    cov = np.asarray(cov)
    n = cov.shape[0]
    if not 1 <= n_sources < n:
        raise InvalidArgumentError(f"need 1 <= n_sources < N = {n}, got {n_sources}")
    if method == "eigh":
        vals, vecs = np.linalg.eigh(cov)
    elif method == "qr":
        vals, vecs = _qr_eigh(cov)
        # re-orthonormalise the selected block against accumulated round-off
        vecs, _ = np.linalg.qr(vecs)
    else:
        raise InvalidArgumentError(f"unknown eigen method {method!r}")
    return vecs[:, : n - n_sources], vals


def steering_vector(azimuth, elevation, geometry, k):
    """UCA manifold exp(j k a sin(el) cos(az - phi_n)); broadcasts over angles."""
    az = np.deg2rad(np.asarray(azimuth, dtype=float))[..., None]
    el = np.deg2rad(np.asarray(elevation, dtype=float))[..., None]
    phase = k * geometry.radius * np.sin(el) * np.cos(az - geometry.element_azimuths)
    return np.exp(1j * phase)


def music_denominator(noise_basis, steering):
    proj = steering.conj() @ noise_basis
    return np.sum(np.abs(proj) ** 2, axis=-1)


def music_spectrum(noise_basis, geometry, k, azimuth_grid, elevation_grid):
    az, el = np.meshgrid(azimuth_grid, elevation_grid, indexing="ij")
    den = music_denominator(noise_basis, steering_vector(az, el, geometry, k))
    near_singular = bool(np.any(den < DENOMINATOR_FLOOR))
    return MusicGrid(1.0 / np.maximum(den, DENOMINATOR_FLOOR), np.asarray(azimuth_grid, float),
                     np.asarray(elevation_grid, float), near_singular)


def make_grid(start, stop, step):
    n = int(round((stop - start) / step))
    return start + step * np.arange(n + 1)


class MusicDOA(BaseEstimator):
    """2-D MUSIC direction finder for a uniform circular array.

    ``fit`` takes snapshots (N, count); ``predict`` returns the spectrum's
    argmax as (azimuth, elevation) in degrees, optionally polished by a
    local search on the continuous spectrum.
    """

    def __init__(self, geometry=None, wavenumber=None, n_sources=1, azimuth_range=(-180.0, 180.0),
                 elevation_range=(90.0, 180.0), azimuth_step=1.0, elevation_step=1.0,
                 method="eigh", refine=True):
        self.geometry = geometry
        self.wavenumber = wavenumber
        self.n_sources = n_sources
        self.azimuth_range = azimuth_range
        self.elevation_range = elevation_range
        self.azimuth_step = azimuth_step
        self.elevation_step = elevation_step
        self.method = method
        self.refine = refine

    def fit(self, X, y=None):
        snaps = X if isinstance(X, SnapshotMatrix) else SnapshotMatrix(X)
        if snaps.columns.shape[0] != self.geometry.n_elements:
            raise DimensionError("snapshot length does not match the array size")
        self.covariance_ = covariance(snaps)
        self.noise_basis_, self.eigenvalues_ = noise_subspace(self.covariance_, self.n_sources,
                                                              self.method)
        self.azimuth_grid_ = make_grid(*self.azimuth_range, self.azimuth_step)
        self.elevation_grid_ = make_grid(*self.elevation_range, self.elevation_step)
        self.spectrum_ = music_spectrum(self.noise_basis_, self.geometry, self.wavenumber,
                                        self.azimuth_grid_, self.elevation_grid_)
        return self

    def _denominator(self, angles):
        a = steering_vector(angles[0], angles[1], self.geometry, self.wavenumber)
        return float(music_denominator(self.noise_basis_, a))

    def _hemisphere(self):
        lo, hi = self.elevation_range
        if 90.0 <= lo and hi <= 180.0:
            return "lower"
        if 0.0 <= lo and hi <= 90.0:
            return "upper"
        return None

    def predict(self, X=None):
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "spectrum_")
        az, el = self.spectrum_.argmax()
        if not self.refine:
            return az, el
        hemi = self._hemisphere()
        if hemi is None:
            return self._refine_angles(az, el)
        # the UCA manifold depends on direction only through (u, v) =
        # sin(el)(cos az, sin az), which stays well conditioned near the pole
        rho0 = np.sin(np.deg2rad(el))
        x0 = rho0 * np.array([np.cos(np.deg2rad(az)), np.sin(np.deg2rad(az))])

        def to_angles(uv):
            rho = min(float(np.hypot(*uv)), 2.0)
            if rho > 1.0:
                rho = 2.0 - rho  # mirror rather than clip: no flat region past the horizon
            off = np.rad2deg(np.arcsin(rho))
            return float(np.rad2deg(np.arctan2(uv[1], uv[0]))), (180.0 - off if hemi == "lower" else off)

        def cost(uv):
            return self._denominator(to_angles(uv))

        step = np.deg2rad(max(self.azimuth_step, self.elevation_step))
        simplex = np.array([x0, x0 + [step, 0.0], x0 + [0.0, step]])
        res = minimize(cost, x0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-24,
                                "maxiter": 4000})
        if res.fun > self._denominator((az, el)):
            return az, el
        az_r, el_r = to_angles(res.x)
        lo, hi = self.elevation_range
        if not lo <= el_r <= hi:
            return az, el
        return az_r, el_r

    def _refine_angles(self, az, el):
        bounds = [(az - self.azimuth_step, az + self.azimuth_step),
                  (max(el - self.elevation_step, self.elevation_range[0]),
                   min(el + self.elevation_step, self.elevation_range[1]))]
        res = minimize(self._denominator, x0=[az, el], method="Nelder-Mead", bounds=bounds,
                       options={"xatol": 1e-7, "fatol": 1e-20, "maxiter": 2000})
        if res.fun <= self._denominator([az, el]):
            az, el = float(res.x[0]), float(res.x[1])
        return (az + 180.0) % 360.0 - 180.0, el

    def peak_value(self, azimuth, elevation):
        return 1.0 / max(self._denominator([azimuth, elevation]), DENOMINATOR_FLOOR)
