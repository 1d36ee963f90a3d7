"""UAV circular array, point targets, ground plane and clutter field.

Spherical coordinates use azimuth measured from +x in the xy-plane and
elevation measured from the +z axis (a polar angle), both in degrees, so a
target below the array sits at elevation > 90.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    InvalidArgumentError,
    InvalidGeometryError,
    TargetOverrunError,
    UndefinedAnglesError,
)


def spherical_to_cartesian(r, azimuth, elevation):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise InvalidArgumentError("range must be non-negative")
    az = np.deg2rad(azimuth)
    el = np.deg2rad(elevation)
    return np.stack(
        [r * np.sin(el) * np.cos(az), r * np.sin(el) * np.sin(az), r * np.cos(el)], axis=-1
    )


def cartesian_to_spherical(xyz):
    """Inverse of :func:`spherical_to_cartesian`; azimuth in (-180, 180]."""
    xyz = np.asarray(xyz, dtype=float)
    r = np.linalg.norm(xyz, axis=-1)
    if np.any(r == 0):
        raise UndefinedAnglesError("angles are undefined at the origin")
    az = np.rad2deg(np.arctan2(xyz[..., 1], xyz[..., 0]))
    el = np.rad2deg(np.arccos(np.clip(xyz[..., 2] / r, -1.0, 1.0)))
    return r, az, el


def half_wavelength_radius(n_elements, wavelength):
    """UCA radius giving lambda/2 spacing between neighbouring elements."""
    if n_elements < 2:
        return wavelength / 4
    return wavelength / (4 * np.sin(np.pi / n_elements))


@dataclass
class UcaGeometry:
    n_elements: int = 8
    radius: float = 1.07
    center: tuple = (0.0, 0.0, 20.0)
    element_azimuths: np.ndarray | None = None
    beam_weights: np.ndarray | None = None
    element_pattern_h: float = 1.0
    element_pattern_v: float = 1.0

    def __post_init__(self):
        if self.n_elements < 1:
            raise InvalidArgumentError("n_elements must be >= 1")
        if not self.radius > 0:
            raise InvalidArgumentError(f"radius must be positive, got {self.radius}")
        if self.element_azimuths is None:
            self.element_azimuths = 2 * np.pi * np.arange(self.n_elements) / self.n_elements
        phi = np.asarray(self.element_azimuths, dtype=float)
        if phi.shape != (self.n_elements,):
            raise InvalidArgumentError("element_azimuths must have one entry per element")
        if np.any(phi < 0) or np.any(phi >= 2 * np.pi) or np.any(np.diff(phi) <= 0):
            raise InvalidArgumentError("element_azimuths must increase strictly within [0, 2pi)")
        self.element_azimuths = phi
        if self.beam_weights is None:
            self.beam_weights = np.ones(self.n_elements, dtype=complex)
        w = np.asarray(self.beam_weights, dtype=complex)
        if w.shape != (self.n_elements,) or not np.all(np.isfinite(w)):
            raise InvalidArgumentError("beam_weights must be N finite complex values")
        self.beam_weights = w
        self.center = tuple(float(v) for v in self.center)

    def positions(self):
        return uca_positions(self)


def uca_positions(geometry):
    """(N, 3) element positions on a horizontal circle around the center."""
    phi = geometry.element_azimuths
    offsets = geometry.radius * np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], axis=1)
    return np.asarray(geometry.center) + offsets


@dataclass(frozen=True)
class PolarimetricRcs:
    """Scattering matrix entries in m^2 with optional phases (radians).

    First letter is the received polarisation, second the incident one.
    """

    sigma_hh: float = 1.0
    sigma_hv: float = 0.0
    sigma_vh: float = 0.0
    sigma_vv: float = 1.0
    phases: tuple = (0.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        for name in ("sigma_hh", "sigma_hv", "sigma_vh", "sigma_vv"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be >= 0, got {value}")

    def scattering_matrix(self):
        """2x2 complex amplitude matrix [[hh, hv], [vh, vv]] (sqrt of RCS)."""
        sig = np.array([[self.sigma_hh, self.sigma_hv], [self.sigma_vh, self.sigma_vv]])
        ph = np.asarray(self.phases, dtype=float).reshape(2, 2)
        return np.sqrt(sig) * np.exp(1j * ph)

    def with_random_phases(self, rng):
        return PolarimetricRcs(self.sigma_hh, self.sigma_hv, self.sigma_vh, self.sigma_vv,
                               tuple(rng.uniform(0, 2 * np.pi, 4)))


@dataclass(frozen=True)
class Target:
    """Point target; ``position0`` is (range m, azimuth deg, elevation deg)
    relative to the array center, ``radial_speed`` positive when approaching."""

    position0: tuple
    radial_speed: float = 0.0
    rcs: PolarimetricRcs = field(default_factory=PolarimetricRcs)

    def __post_init__(self):
        if len(self.position0) != 3 or not self.position0[0] > 0:
            raise InvalidArgumentError(f"target range must be positive, got {self.position0}")
        if not np.isfinite(self.radial_speed):
            raise InvalidArgumentError("radial_speed must be finite")


def target_position_at(target, t, center=(0.0, 0.0, 0.0)):
    """Cartesian position(s) at slow time ``t`` (scalar or array of seconds)."""
    r0, az, el = target.position0
    r = r0 - target.radial_speed * np.asarray(t, dtype=float)
    if np.any(r <= 0):
        raise TargetOverrunError(f"target range reaches {np.min(r):.4g} m within t")
    return np.asarray(center) + spherical_to_cartesian(r, az, el)


@dataclass(frozen=True)
class ClutterScatterer:
    position: tuple
    rcs: PolarimetricRcs
    velocity: float = 0.0

    def __post_init__(self):
        if self.velocity != 0.0:
            raise InvalidArgumentError("clutter scatterers are static")
        if self.position[2] != 0.0:
            raise InvalidGeometryError("clutter lies on the ground plane (z = 0)")


def generate_clutter(patch, density, coefficient_db, seed, random_phase=False):
    """Static ground scatterers spread uniformly over ``patch``.

    ``patch`` is (xmin, xmax, ymin, ymax) in metres.  Each scatterer gets
    co-polar RCS ``10**(coefficient_db/10) / density`` so the aggregate RCS per
    square metre of ground equals the clutter coefficient (relative to a
    1 m^2 reference).
    """
    xmin, xmax, ymin, ymax = map(float, patch)
    area = (xmax - xmin) * (ymax - ymin)
    if not area > 0:
        raise InvalidArgumentError(f"degenerate clutter patch {patch}")
    if not density > 0:
        raise InvalidArgumentError("clutter density must be positive")
    count = int(round(density * area))
    rng = np.random.default_rng(seed)
    xs = rng.uniform(xmin, xmax, count)
    ys = rng.uniform(ymin, ymax, count)
    sigma = 10 ** (coefficient_db / 10) / density
    base = PolarimetricRcs(sigma, 0.0, 0.0, sigma)
    out = []
    for x, y in zip(xs, ys):
        rcs = base.with_random_phases(rng) if random_phase else base
        out.append(ClutterScatterer((float(x), float(y), 0.0), rcs))
    return out


@dataclass(frozen=True)
class GroundModel:
    """Flat ground at z = 0.

    ``mode`` is ``"fresnel"`` (coefficients from the permittivity and the
    grazing angle) or ``"fixed"`` (constant coefficients; zeros disable the
    ground bounce).
    """

    relative_permittivity: complex = 5.0 - 0.5j
    mode: str = "fresnel"
    fixed_gamma_h: complex = 0.0
    fixed_gamma_v: complex = 0.0

    def __post_init__(self):
        if self.mode not in ("fresnel", "fixed"):
            raise InvalidArgumentError(f"unknown ground mode {self.mode!r}")
        if self.mode == "fixed" and (abs(self.fixed_gamma_h) > 1 or abs(self.fixed_gamma_v) > 1):
            raise InvalidArgumentError("|gamma| must not exceed 1 for passive ground")

    @property
    def enabled(self):
        return self.mode == "fresnel" or self.fixed_gamma_h != 0 or self.fixed_gamma_v != 0


NO_GROUND = GroundModel(mode="fixed")


@dataclass
class Scene:
    uca: UcaGeometry
    targets: list = field(default_factory=list)
    clutter: list = field(default_factory=list)
    ground: GroundModel = field(default_factory=GroundModel)

    def __post_init__(self):
        if self.uca.center[2] <= 0:
            raise InvalidGeometryError("array must sit above the ground plane")
