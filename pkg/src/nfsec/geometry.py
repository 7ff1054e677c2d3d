"""Planar-array geometry and near-field channel synthesis.

The array is an n_rows x n_cols grid in the z=0 plane, centered at the
origin, with element (i, l) at (x_l, y_i, 0).  Channel vectors follow the
non-uniform spherical-wave model: the entry for element (i, l) seen from a
field point r has amplitude lambda/(4*pi*dist) and stored phase
exp(+1j*k_c*dist), so that the conjugate transpose used in the received
signal model contributes the propagation phase exp(-1j*k_c*dist).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CoincidentPosition

SPEED_OF_LIGHT = 299_792_458.0

# minimum field-point / element separation before we call it coincident (m)
_MIN_SEPARATION = 1e-12


def as_position(r) -> np.ndarray:
    """Validate and convert a 3-D position to a float ndarray."""
    p = np.asarray(r, dtype=float).reshape(3)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"position has non-finite components: {p}")
    return p


def as_positions(rs) -> np.ndarray:
    """Validate an (n, 3) stack of positions."""
    ps = np.atleast_2d(np.asarray(rs, dtype=float))
    if ps.ndim != 2 or ps.shape[1] != 3:
        raise ValueError(f"expected (n, 3) positions, got shape {ps.shape}")
    if not np.all(np.isfinite(ps)):
        raise ValueError("positions have non-finite components")
    return ps


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array: n_rows x n_cols elements spaced `spacing` meters,
    carrier `carrier_hz`."""

    n_rows: int
    n_cols: int
    spacing: float
    carrier_hz: float

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("array needs at least one element per dimension")
        if self.spacing <= 0:
            raise ValueError("element spacing must be positive")
        if self.carrier_hz <= 0:
            raise ValueError("carrier frequency must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @classmethod
    def half_wavelength(cls, n_rows: int, n_cols: int, carrier_hz: float) -> "ArrayGeometry":
        """Geometry with the conventional d = lambda/2 spacing."""
        d = 0.5 * SPEED_OF_LIGHT / carrier_hz
        return cls(n_rows, n_cols, d, carrier_hz)


@dataclass(frozen=True)
class Scatterer:
    """Point scatterer with complex-Gaussian reflection coefficient of the
    given variance."""

    position: np.ndarray
    variance: float

    def __post_init__(self):
        object.__setattr__(self, "position", as_position(self.position))
        if self.variance <= 0:
            raise ValueError("scatterer variance must be positive")


@dataclass(frozen=True)
class Scenario:
    """Single experiment input record: geometry, terminals, powers, gains.

    symbol_gains are the per-user amplitudes beta_m enforced by the ZF
    precoder; modulations are strings like "PSK-8" or "QAM-16", parsed by
    the montecarlo module.
    """

    geometry: ArrayGeometry
    users: np.ndarray
    eavesdroppers: np.ndarray
    n_rf: int
    noise_power: float
    transmit_power: float
    symbol_gains: np.ndarray
    modulations: tuple = ()
    scatterers: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "users", as_positions(self.users))
        eves = self.eavesdroppers
        eves = np.zeros((0, 3)) if eves is None or len(eves) == 0 else as_positions(eves)
        object.__setattr__(self, "eavesdroppers", eves)
        gains = np.asarray(self.symbol_gains, dtype=float).reshape(-1)
        object.__setattr__(self, "symbol_gains", gains)
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        object.__setattr__(self, "modulations", tuple(self.modulations))
        m = self.n_users
        if m < 1:
            raise ValueError("need at least one user")
        if gains.shape != (m,):
            raise ValueError("need one symbol gain per user")
        if np.any(gains <= 0):
            raise ValueError("symbol gains must be positive")
        if not (m <= self.n_rf <= self.geometry.n_elements):
            raise ValueError(
                f"need n_users <= n_rf <= n_elements, got {m} / {self.n_rf} / "
                f"{self.geometry.n_elements}"
            )
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")
        if self.transmit_power <= 0:
            raise ValueError("transmit power must be positive")
        if self.modulations and len(self.modulations) != m:
            raise ValueError("need one modulation per user when specified")

    @property
    def n_users(self) -> int:
        return self.users.shape[0]

    @property
    def n_eves(self) -> int:
        return self.eavesdroppers.shape[0]


@dataclass
class ChannelSet:
    """Channel matrices for one scenario realization.

    h_u columns are user channel vectors; h_bar holds the LoS means and
    r_cov the multi-path covariance when the scenario has scatterers.
    """

    h_u: np.ndarray
    h_bar: np.ndarray | None = None
    r_cov: np.ndarray | None = None


def element_positions(geom: ArrayGeometry) -> np.ndarray:
    """(N, 3) element coordinates, row-major: row index outer, column inner."""
    d = geom.spacing
    x = (np.arange(1, geom.n_cols + 1) - (geom.n_cols + 1) / 2.0) * d
    y = (np.arange(1, geom.n_rows + 1) - (geom.n_rows + 1) / 2.0) * d
    xx, yy = np.meshgrid(x, y)  # yy varies along axis 0 (rows)
    pts = np.zeros((geom.n_elements, 3))
    pts[:, 0] = xx.ravel()
    pts[:, 1] = yy.ravel()
    return pts


def fraunhofer_distance(geom: ArrayGeometry) -> float:
    """2 D^2 / lambda with aperture D = sqrt(2) * L, L the longer side span."""
    side = max(geom.n_rows - 1, geom.n_cols - 1) * geom.spacing
    aperture_sq = 2.0 * side * side
    return 2.0 * aperture_sq / geom.wavelength


def _distances(geom: ArrayGeometry, points: np.ndarray) -> np.ndarray:
    """(n_points, N) separations between field points and elements."""
    elems = element_positions(geom)
    diff = points[:, None, :] - elems[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def los_channel(geom: ArrayGeometry, r) -> np.ndarray:
    """LoS channel vector (N,) at field point r.

    Entry magnitude is lambda/(4*pi*dist); stored phase +k_c*dist (see
    module docstring for the sign convention).
    """
    return los_channel_stack(geom, as_position(r)[None, :])[0]


def los_channel_stack(geom: ArrayGeometry, points) -> np.ndarray:
    """(n_points, N) LoS channel vectors for a stack of field points."""
    pts = as_positions(points)
    dist = _distances(geom, pts)
    if np.any(dist < _MIN_SEPARATION):
        raise CoincidentPosition("field point coincides with an array element")
    lam = geom.wavelength
    amp = lam / (4.0 * np.pi * dist)
    phase = geom.wavenumber * dist
    out = np.empty(dist.shape, dtype=np.complex128)
    out.real = amp * np.cos(phase)
    out.imag = amp * np.sin(phase)
    return out


def channel_matrix(geom: ArrayGeometry, positions) -> np.ndarray:
    """(N, M) LoS channel matrix whose columns are the per-position vectors."""
    return los_channel_stack(geom, positions).T.copy()


def scatterer_link_gain(scat: Scatterer, r_user, geom: ArrayGeometry) -> complex:
    """Free-space complex gain between a scatterer and a terminal position."""
    ru = as_position(r_user)
    dist = float(np.linalg.norm(scat.position - ru))
    if dist < _MIN_SEPARATION:
        raise CoincidentPosition("scatterer coincides with the terminal")
    lam = geom.wavelength
    return (lam / (4.0 * np.pi * dist)) * np.exp(-1j * geom.wavenumber * dist)


def sample_multipath_channel(geom: ArrayGeometry, r_user, scatterers, rng) -> np.ndarray:
    """One multi-path channel draw: LoS mean plus scattered components with
    independent complex-Gaussian reflection coefficients."""
    h = los_channel(geom, r_user).copy()
    for scat in scatterers:
        g = scatterer_link_gain(scat, r_user, geom)
        scale = np.sqrt(scat.variance / 2.0)
        alpha = scale * (rng.standard_normal() + 1j * rng.standard_normal())
        h += alpha * g * los_channel(geom, scat.position)
    return h


def multipath_covariance(geom: ArrayGeometry, r_user, scatterers) -> np.ndarray:
    """Covariance of the scattered part: sum of variance-weighted outer
    products of the scatterer-to-array channel vectors.  Hermitian PSD with
    rank at most the number of scatterers."""
    n = geom.n_elements
    cov = np.zeros((n, n), dtype=np.complex128)
    for scat in scatterers:
        g = scatterer_link_gain(scat, r_user, geom)
        hs = los_channel(geom, scat.position)
        cov += scat.variance * (abs(g) ** 2) * np.outer(hs, hs.conj())
    return cov


def sample_user_channels(geom: ArrayGeometry, users, scatterers, rng) -> np.ndarray:
    """(N, M) matrix of independent multi-path draws, one column per user."""
    cols = [sample_multipath_channel(geom, r, scatterers, rng) for r in as_positions(users)]
    return np.stack(cols, axis=1)
