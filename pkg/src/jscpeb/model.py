"""Waveform and radio parameters, ULA steering, beamforming, and link budget."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import R_MIN, SPEED_OF_LIGHT
from .errors import DomainError, NearFieldError
from .geometry import BaseStation, global_to_local


@dataclass(frozen=True)
class WaveformParams:
    """OFDM numerology. ``symbol_duration_total`` includes the cyclic prefix."""

    num_subcarriers: int
    num_symbols: int
    subcarrier_spacing: float
    cp_duration: float = 0.0

    def __post_init__(self):
        if self.num_subcarriers < 2 or self.num_symbols < 2:
            raise DomainError("need at least 2 subcarriers and 2 symbols")
        if not self.subcarrier_spacing > 0:
            raise DomainError("subcarrier spacing must be positive")
        if self.cp_duration < 0:
            raise DomainError("cyclic prefix duration must be non-negative")

    @property
    def symbol_duration(self) -> float:
        """Useful symbol time T = 1/df."""
        return 1.0 / self.subcarrier_spacing

    @property
    def symbol_duration_total(self) -> float:
        """T_s = T + T_CP."""
        return 1.0 / self.subcarrier_spacing + self.cp_duration

    @property
    def bandwidth(self) -> float:
        return self.num_subcarriers * self.subcarrier_spacing


@dataclass(frozen=True)
class RadioParams:
    """Array sizes, gains, and power budget, all in linear SI units.

    Only the product ``total_tx_power * tx_array_gain`` (the EIRP) enters the
    sensing SNR.
    """

    num_rx_antennas: int
    carrier_frequency: float
    total_tx_power: float
    noise_psd: float
    sensing_power_fraction: float
    tx_array_gain: float = 1.0
    rx_element_gain: float = 1.0
    num_tx_antennas: int = 16

    def __post_init__(self):
        if self.num_rx_antennas < 2:
            raise DomainError("need at least 2 receive antennas")
        if self.num_tx_antennas < 1:
            raise DomainError("need at least 1 transmit antenna")
        if not 0.0 <= self.sensing_power_fraction <= 1.0:
            raise DomainError("sensing power fraction must lie in [0, 1]")
        for name in ("carrier_frequency", "total_tx_power", "noise_psd",
                     "tx_array_gain", "rx_element_gain"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")

    @property
    def eirp(self) -> float:
        return self.total_tx_power * self.tx_array_gain

    def avg_subcarrier_power(self, num_subcarriers: int) -> float:
        """P_avg = P_T / K."""
        return self.total_tx_power / num_subcarriers


@dataclass(frozen=True)
class Target:
    x: float
    y: float
    rcs: float = 1.0

    def __post_init__(self):
        if not self.rcs > 0:
            raise DomainError("radar cross-section must be positive")

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class SensingLink:
    """Per BS/target quantities. ``snr`` is per subcarrier per receive element."""

    range: float
    local_doa: float
    path_gain_sq: float
    snr: float

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr) if self.snr > 0 else -math.inf


def steering_vector(theta: float, n_elements: int) -> np.ndarray:
    """Half-wavelength ULA steering vector referenced to the array centre."""
    p = np.arange(n_elements) - (n_elements - 1) / 2.0
    return np.exp(1j * np.pi * math.sin(theta) * p)


def dual_beamformer(theta_c: float, theta_s: float, radio: RadioParams,
                    num_subcarriers: int) -> np.ndarray:
    """Multi-beam precoder splitting power between a comm and a sensing beam."""
    n = radio.num_tx_antennas
    scale = math.sqrt(radio.avg_subcarrier_power(num_subcarriers) * radio.tx_array_gain) / n
    rho = radio.sensing_power_fraction
    w_s = scale * steering_vector(theta_s, n)
    w_c = scale * steering_vector(theta_c, n)
    return math.sqrt(rho) * w_s + math.sqrt(1.0 - rho) * w_c


def path_gain_sq(r, rcs, radio: RadioParams):
    """Two-way radar-equation power gain alpha^2; accepts scalars or arrays."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise DomainError("target coincides with base station")
    c = SPEED_OF_LIGHT
    gain = (radio.rx_element_gain * c * c * np.asarray(rcs, dtype=float)
            / ((4.0 * math.pi) ** 3 * radio.carrier_frequency ** 2 * r_arr ** 4))
    return float(gain) if np.ndim(gain) == 0 else gain


def sensing_snr(alpha_sq, waveform: WaveformParams, radio: RadioParams):
    """Per-subcarrier, per-element SNR with the sensing beam on the target."""
    return (radio.sensing_power_fraction * radio.eirp * alpha_sq
            / (radio.noise_psd * waveform.num_subcarriers * waveform.subcarrier_spacing))


def link_snr(target: Target, bs: BaseStation, waveform: WaveformParams,
             radio: RadioParams) -> SensingLink:
    local = global_to_local(target.position, bs)
    if local.range < R_MIN:
        raise NearFieldError(
            f"near-field guard violated: target {local.range:.3g} m from station at "
            f"({bs.x:g}, {bs.y:g}), minimum {R_MIN:g} m")
    a2 = path_gain_sq(local.range, target.rcs, radio)
    return SensingLink(local.range, local.doa, a2, sensing_snr(a2, waveform, radio))
