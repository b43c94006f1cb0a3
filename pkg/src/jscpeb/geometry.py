"""Planar frames, Jacobians, and the polar-to-Cartesian reparameterization.

Each base station carries a local frame whose +x axis is the array boresight.
The local direction of arrival is ``atan2(y_n, x_n)``, so boresight is zero and
angles grow counterclockwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import ENDFIRE_COS_TOL, R_MIN, SPEED_OF_LIGHT
from .errors import DomainError, NearFieldError


def wrap_angle(angle: float) -> float:
    """Map an angle to (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


@dataclass(frozen=True)
class BaseStation:
    """Monostatic base station: origin in the global frame and array rotation.

    ``rotation`` is the counterclockwise angle of the local frame (boresight)
    relative to the global x axis. ``fov_limit`` bounds the usable |DoA|; targets
    outside it contribute no information.
    """

    x: float
    y: float
    rotation: float = 0.0
    fov_limit: float = math.pi / 2

    def __post_init__(self):
        object.__setattr__(self, "rotation", wrap_angle(float(self.rotation)))
        if not 0.0 < self.fov_limit <= math.pi:
            raise DomainError("fov_limit must lie in (0, pi]")

    @property
    def origin(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class LocalCoords:
    x: float
    y: float
    range: float
    doa: float

    @classmethod
    def from_xy(cls, x: float, y: float) -> "LocalCoords":
        return cls(x, y, math.hypot(x, y), math.atan2(y, x))


def global_to_local(p, bs: BaseStation) -> LocalCoords:
    """Express a global position in the local frame of ``bs``."""
    dx = p[0] - bs.x
    dy = p[1] - bs.y
    cos_r, sin_r = math.cos(bs.rotation), math.sin(bs.rotation)
    return LocalCoords.from_xy(dx * cos_r + dy * sin_r, -dx * sin_r + dy * cos_r)


def local_to_global(local: LocalCoords, bs: BaseStation) -> tuple[float, float]:
    cos_r, sin_r = math.cos(bs.rotation), math.sin(bs.rotation)
    return (bs.x + local.x * cos_r - local.y * sin_r,
            bs.y + local.x * sin_r + local.y * cos_r)


def global_to_local_batch(xs, ys, bs: BaseStation):
    """Vectorized :func:`global_to_local`; returns ``(x_n, y_n, r_n, doa_n)`` arrays."""
    dx = np.asarray(xs, dtype=float) - bs.x
    dy = np.asarray(ys, dtype=float) - bs.y
    cos_r, sin_r = math.cos(bs.rotation), math.sin(bs.rotation)
    xn = dx * cos_r + dy * sin_r
    yn = -dx * sin_r + dy * cos_r
    return xn, yn, np.hypot(xn, yn), np.arctan2(yn, xn)


def jacobian_polar(local: LocalCoords) -> np.ndarray:
    """Jacobian of (delay, DoA) with respect to local (x, y).

    Rows are (tau, theta), columns (x, y).
    """
    x, y = local.x, local.y
    r2 = x * x + y * y
    if r2 == 0.0:
        raise DomainError("Jacobian undefined at the array origin")
    r = math.sqrt(r2)
    c = SPEED_OF_LIGHT
    return np.array([[2.0 * x / (c * r), 2.0 * y / (c * r)],
                     [-y / r2, x / r2]])


def jacobian_rotation(rotation: float) -> np.ndarray:
    """Jacobian of the global-to-local map (x, y) -> (x_n, y_n)."""
    c, s = math.cos(rotation), math.sin(rotation)
    return np.array([[c, s], [-s, c]])


def efim_position_local(efim_polar: np.ndarray, local: LocalCoords) -> np.ndarray:
    """Reparameterize a (delay, DoA) EFIM into local Cartesian coordinates.

    This is the explicit Jacobian product; :func:`efim_position_closed` is the
    algebraically reduced form used in production.
    """
    if local.range < R_MIN:
        raise NearFieldError(f"target at {local.range:.3g} m is inside the {R_MIN} m near-field guard")
    jm = jacobian_polar(local)
    return jm.T @ np.asarray(efim_polar, dtype=float) @ jm


def efim_position_cartesian(snr, x, y, num_subcarriers, num_symbols,
                            subcarrier_spacing, num_rx):
    """Closed-form local Cartesian EFIM from local (x, y); broadcasts over arrays.

    Returns an array of shape ``broadcast_shape + (2, 2)``.
    """
    c = SPEED_OF_LIGHT
    K, M, N = num_subcarriers, num_symbols, num_rx
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = x * x + y * y
    # cos^2 of the local DoA without a round trip through atan2
    cos2 = np.divide(x * x, r2, out=np.zeros_like(r2), where=r2 > 0)
    a = 16.0 * subcarrier_spacing ** 2 * (K * K - 1)
    b = c * c * (N * N - 1) * cos2
    xi = math.pi ** 2 * K * M * N * np.asarray(snr, dtype=float) / (6.0 * c * c * r2 * r2)
    off = xi * x * y * (a * r2 - b)
    out = np.empty(np.broadcast(xi, b).shape + (2, 2))
    out[..., 0, 0] = xi * (a * x * x * r2 + b * y * y)
    out[..., 0, 1] = off
    out[..., 1, 0] = off
    out[..., 1, 1] = xi * (a * y * y * r2 + b * x * x)
    return out


def efim_principal_info(snr, r, cos2, num_subcarriers, num_symbols, subcarrier_spacing, num_rx):
    """Eigenvalues of the position EFIM in 1/m^2: (along the range, across it).

    The eigenvectors are the unit line-of-sight vector and its normal.
    """
    c = SPEED_OF_LIGHT
    K, M, N = num_subcarriers, num_symbols, num_rx
    g = math.pi ** 2 * K * M * N * np.asarray(snr, dtype=float) / 6.0
    along = g * 16.0 * subcarrier_spacing ** 2 * (K * K - 1) / (c * c)
    across = g * (N * N - 1) * np.asarray(cos2, dtype=float) / np.asarray(r, dtype=float) ** 2
    return along, across


def efim_position_closed(link, waveform, radio, local: LocalCoords) -> np.ndarray:
    """Local Cartesian EFIM of one link in closed form."""
    if local.range < R_MIN:
        raise NearFieldError(f"target at {local.range:.3g} m is inside the {R_MIN} m near-field guard")
    return efim_position_cartesian(link.snr, local.x, local.y, waveform.num_subcarriers,
                                   waveform.num_symbols, waveform.subcarrier_spacing,
                                   radio.num_rx_antennas)


def crb_position_single(link, waveform, radio, local: LocalCoords | None = None) -> float:
    """Single-BS position CRB in m^2 (the PEB squared).

    Range and DoA come from ``local`` when given, else from ``link``. Endfire
    and zero SNR give ``inf``.
    """
    r = link.range if local is None else local.range
    doa = link.local_doa if local is None else local.doa
    if link.snr <= 0.0 or abs(math.cos(doa)) <= ENDFIRE_COS_TOL:
        return math.inf
    c = SPEED_OF_LIGHT
    K, M = waveform.num_subcarriers, waveform.num_symbols
    N = radio.num_rx_antennas
    delay_term = (c * c / 16.0) / (waveform.subcarrier_spacing ** 2 * (K * K - 1))
    angle_term = r * r / ((N * N - 1) * math.cos(doa) ** 2)
    return 6.0 / (math.pi ** 2 * K * M * N * link.snr) * (delay_term + angle_term)
