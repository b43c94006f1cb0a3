"""Cooperative fusion of per-station position information.

Stations are assumed orthogonal in time or frequency, so their Fisher
information adds. Every station steers its sensing beam at the target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .constants import R_MIN
from .errors import DomainError, NearFieldError
from .geometry import (BaseStation, efim_position_cartesian, efim_principal_info, global_to_local_batch,
                       jacobian_rotation)
from .linalg import inv_sym2, trace_inv_rank_sum
from .model import RadioParams, SensingLink, WaveformParams, path_gain_sq, sensing_snr


@dataclass(frozen=True)
class Scenario:
    stations: tuple[BaseStation, ...]
    waveform: WaveformParams
    radio: RadioParams
    rcs: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        if not self.stations:
            raise DomainError("scenario needs at least one base station")
        origins = [s.origin for s in self.stations]
        if len(set(origins)) != len(origins):
            raise DomainError("base stations must be at distinct positions")
        if not self.rcs > 0:
            raise DomainError("radar cross-section must be positive")

    def with_stations(self, n: int) -> "Scenario":
        """The same scenario restricted to the first ``n`` stations."""
        if not 1 <= n <= len(self.stations):
            raise DomainError(f"station count must be in [1, {len(self.stations)}]")
        return replace(self, stations=self.stations[:n])


@dataclass
class PebResult:
    peb: float
    efim: np.ndarray
    contributions: list[np.ndarray]
    links: list[SensingLink]
    in_fov: list[bool]

    @property
    def snr_db(self) -> list[float]:
        return [link.snr_db for link in self.links]

    @property
    def informative(self) -> bool:
        return math.isfinite(self.peb)


@dataclass
class BatchEfim:
    """Fused and per-station global-frame EFIMs over an array of points."""

    efim: np.ndarray            # (..., 2, 2)
    contributions: np.ndarray   # (n_bs, ..., 2, 2)
    ranges: np.ndarray          # (n_bs, ...)
    doas: np.ndarray
    path_gain_sq: np.ndarray
    snr: np.ndarray
    in_fov: np.ndarray
    near_field: np.ndarray      # (...) True where any station is closer than R_MIN
    # principal decomposition: weights (2 * n_bs, ...) on unit vectors (gx, gy)
    weights: np.ndarray = None
    gx: np.ndarray = None
    gy: np.ndarray = None

    def trace_inv(self) -> np.ndarray:
        """Tr(E^-1) of the fused EFIM; ``inf`` where it is singular."""
        return trace_inv_rank_sum(self.weights, self.gx, self.gy)[0]


def efim_batch(scenario: Scenario, xs, ys) -> BatchEfim:
    """Evaluate every station's EFIM contribution at broadcast points ``(xs, ys)``.

    Near-field points get NaN link quantities for the offending station and no
    contribution from it; callers decide whether that is an error.
    """
    xs, ys = np.broadcast_arrays(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
    w, radio = scenario.waveform, scenario.radio
    n = len(scenario.stations)
    contributions = np.zeros((n,) + xs.shape + (2, 2))
    ranges = np.empty((n,) + xs.shape)
    doas = np.empty_like(ranges)
    gains = np.empty_like(ranges)
    snrs = np.empty_like(ranges)
    fov = np.zeros((n,) + xs.shape, dtype=bool)
    near = np.zeros(xs.shape, dtype=bool)
    weights = np.zeros((2 * n,) + xs.shape)
    gx = np.zeros_like(weights)
    gy = np.zeros_like(weights)

    for i, bs in enumerate(scenario.stations):
        xn, yn, r, doa = global_to_local_batch(xs, ys, bs)
        close = r < R_MIN
        near |= close
        r_safe = np.where(close, np.nan, r)
        a2 = path_gain_sq(np.where(close, 1.0, r), scenario.rcs, radio)
        a2 = np.where(close, np.nan, a2)
        snr = sensing_snr(a2, w, radio)
        visible = ~close & (np.abs(doa) <= bs.fov_limit)
        local = efim_position_cartesian(np.where(visible, snr, 0.0), np.where(close, 1.0, xn), yn,
                                        w.num_subcarriers, w.num_symbols,
                                        w.subcarrier_spacing, radio.num_rx_antennas)
        jn = jacobian_rotation(bs.rotation)
        contributions[i] = np.einsum("ji,...jk,kl->...il", jn, local, jn)
        ranges[i], doas[i], gains[i], snrs[i], fov[i] = r_safe, doa, a2, snr, visible

        r1 = np.where(close, 1.0, r)
        along, across = efim_principal_info(np.where(visible, snr, 0.0), r1, np.cos(doa) ** 2,
                                            w.num_subcarriers, w.num_symbols,
                                            w.subcarrier_spacing, radio.num_rx_antennas)
        ux, uy = (xs - bs.x) / r1, (ys - bs.y) / r1
        weights[2 * i], gx[2 * i], gy[2 * i] = along, ux, uy
        weights[2 * i + 1], gx[2 * i + 1], gy[2 * i + 1] = across, -uy, ux

    return BatchEfim(contributions.sum(axis=0), contributions, ranges, doas, gains, snrs, fov, near,
                     weights, gx, gy)


def peb_from_efim(efim) -> float:
    """sqrt(trace(E^-1)); ``inf`` when E is singular or ill-conditioned."""
    e = np.asarray(efim, dtype=float)
    if e.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    scale = max(np.max(np.abs(e)), np.finfo(float).tiny)
    if abs(e[0, 1] - e[1, 0]) > 1e-12 * scale:
        raise ValueError("EFIM must be symmetric")
    trace_inv, _ = inv_sym2(e)
    return float(np.sqrt(trace_inv))


def peb_batch(scenario: Scenario, xs, ys) -> tuple[np.ndarray, np.ndarray]:
    """PEB at every point plus the near-field mask (PEB is NaN there)."""
    b = efim_batch(scenario, xs, ys)
    peb = np.sqrt(b.trace_inv())
    return np.where(b.near_field, np.nan, peb), b.near_field


def fuse_efim(scenario: Scenario, p: Sequence[float]) -> PebResult:
    """Fused global EFIM and PEB for a target at global position ``p``.

    Raises :class:`NearFieldError` if ``p`` is inside any station's guard.
    When no station sees the target the PEB is ``inf``.
    """
    b = efim_batch(scenario, p[0], p[1])
    if bool(b.near_field):
        i = int(np.argmax(np.isnan(b.ranges)))
        bs = scenario.stations[i]
        raise NearFieldError(f"near-field guard violated: target within {R_MIN:g} m "
                             f"of station {i + 1} at ({bs.x:g}, {bs.y:g})")
    links = [SensingLink(float(b.ranges[i]), float(b.doas[i]), float(b.path_gain_sq[i]),
                         float(b.snr[i])) for i in range(len(scenario.stations))]
    efim = np.array(b.efim)
    return PebResult(
        peb=float(np.sqrt(b.trace_inv())),
        efim=efim,
        contributions=[np.array(c) for c in b.contributions],
        links=links,
        in_fov=[bool(v) for v in b.in_fov],
    )
