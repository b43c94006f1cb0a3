"""Closed-form single-BS Fisher information over (alpha, phi, f_D, tau, theta_R).

Row and column order of every 5x5 matrix is fixed as ``PARAM_NAMES``. The
nuisance block is (alpha, phi, f_D); the parameters of interest are (tau, theta_R).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import ENDFIRE_COS_TOL
from .errors import DomainError, SingularMatrixError
from .linalg import checked_inv
from .model import RadioParams, SensingLink, WaveformParams

PARAM_NAMES = ("alpha", "phi", "f_D", "tau", "theta_R")
NUISANCE = slice(0, 3)
INTEREST = slice(3, 5)


@dataclass(frozen=True)
class ParameterVector:
    amplitude: float
    phase: float
    doppler: float
    delay: float
    doa: float

    def __post_init__(self):
        if not self.amplitude > 0:
            raise DomainError("amplitude must be positive")
        if self.delay < 0:
            raise DomainError("delay must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([self.amplitude, self.phase, self.doppler, self.delay, self.doa])

    @classmethod
    def from_array(cls, values) -> "ParameterVector":
        return cls(*(float(v) for v in values))


@dataclass(frozen=True)
class Fim5:
    """5x5 Fisher matrix and the scale Gamma = SNR * N_R * K * M it was built with."""

    matrix: np.ndarray
    gamma: float


@dataclass(frozen=True)
class Efim2:
    """2x2 equivalent FIM; ``basis`` is ``"polar"`` (tau, theta_R) or ``"cartesian"``."""

    matrix: np.ndarray
    basis: str = "polar"


@dataclass(frozen=True)
class CrlbSet:
    alpha: float
    phi: float
    doppler: float
    delay: float
    doa: float

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.phi, self.doppler, self.delay, self.doa])


def fisher_gamma(snr: float, waveform: WaveformParams, num_rx: int) -> float:
    return snr * num_rx * waveform.num_subcarriers * waveform.num_symbols


def fim_bracket(amplitude: float, doa: float, waveform: WaveformParams, num_rx: int) -> np.ndarray:
    """The Fisher matrix per unit Gamma."""
    K, M = waveform.num_subcarriers, waveform.num_symbols
    ts, df = waveform.symbol_duration_total, waveform.subcarrier_spacing
    pi, pi2 = math.pi, math.pi ** 2
    out = np.zeros((5, 5))
    out[0, 0] = 2.0 / amplitude ** 2
    out[1, 1] = 2.0
    out[1, 2] = out[2, 1] = 2.0 * pi * ts * (M - 1)
    out[1, 3] = out[3, 1] = -2.0 * pi * df * (K - 1)
    out[2, 2] = 4.0 * pi2 * ts ** 2 * (2 * M - 1) * (M - 1) / 3.0
    out[2, 3] = out[3, 2] = -2.0 * pi2 * ts * df * (M - 1) * (K - 1)
    out[3, 3] = 4.0 * pi2 * df ** 2 * (2 * K - 1) * (K - 1) / 3.0
    out[4, 4] = pi2 * (num_rx ** 2 - 1) * math.cos(doa) ** 2 / 6.0
    return out


def fim_closed_form(params: ParameterVector, link: SensingLink, waveform: WaveformParams,
                    radio: RadioParams) -> Fim5:
    gamma = fisher_gamma(link.snr, waveform, radio.num_rx_antennas)
    bracket = fim_bracket(params.amplitude, params.doa, waveform, radio.num_rx_antennas)
    return Fim5(gamma * bracket, gamma)


def crlb_closed_form(link: SensingLink, waveform: WaveformParams, radio: RadioParams,
                     params: ParameterVector) -> CrlbSet:
    """Per-parameter CRBs; the DoA bound is ``inf`` at endfire."""
    if not link.snr > 0:
        raise DomainError("CRB requires a positive SNR")
    K, M = waveform.num_subcarriers, waveform.num_symbols
    N, snr = radio.num_rx_antennas, link.snr
    ts, df = waveform.symbol_duration_total, waveform.subcarrier_spacing
    pi2 = math.pi ** 2
    cos2 = math.cos(params.doa) ** 2
    crb_doa = (math.inf if math.sqrt(cos2) <= ENDFIRE_COS_TOL
               else 6.0 / (pi2 * K * M * (N * N - 1) * N * snr * cos2))
    return CrlbSet(
        alpha=params.amplitude ** 2 / (2.0 * K * M * N * snr),
        phi=(7 * K * M + K + M - 5) / (2.0 * (K * K + K) * (M * M + M) * N * snr),
        doppler=3.0 / (2.0 * pi2 * ts ** 2 * K * M * (M * M - 1) * N * snr),
        delay=3.0 / (2.0 * pi2 * df ** 2 * M * K * (K * K - 1) * N * snr),
        doa=crb_doa,
    )


def schur_efim(fim: Fim5 | np.ndarray) -> Efim2:
    """Eliminate (alpha, phi, f_D) via the Schur complement C - B^T A^-1 B."""
    mat = np.asarray(fim.matrix if isinstance(fim, Fim5) else fim, dtype=float)
    a = mat[NUISANCE, NUISANCE]
    b = mat[NUISANCE, INTEREST]
    c = mat[INTEREST, INTEREST]
    try:
        a_inv = checked_inv(a, equilibrate=True)
    except SingularMatrixError as exc:
        raise SingularMatrixError(f"nuisance block singular: {exc}") from None
    e = c - b.T @ a_inv @ b
    return Efim2(0.5 * (e + e.T), "polar")


def efim_polar_closed(link: SensingLink, waveform: WaveformParams, radio: RadioParams) -> Efim2:
    """Diagonal (tau, theta_R) EFIM in closed form."""
    K = waveform.num_subcarriers
    N = radio.num_rx_antennas
    gamma = fisher_gamma(link.snr, waveform, N)
    pi2 = math.pi ** 2
    return Efim2(np.diag([gamma * 2.0 * pi2 * waveform.subcarrier_spacing ** 2 * (K * K - 1) / 3.0,
                          gamma * pi2 * (N * N - 1) * math.cos(link.local_doa) ** 2 / 6.0]), "polar")


def crlb_from_fim(fim: Fim5) -> np.ndarray:
    """Diagonal of the inverse FIM, in ``PARAM_NAMES`` order."""
    return np.diag(checked_inv(fim.matrix, equilibrate=True)).copy()
