"""Numerical Fisher information from the noiseless mean signal.

For circular complex Gaussian observations with covariance ``noise_var * I``
and a parameterized mean mu, the FIM is

    I_ij = (2 / noise_var) * Re sum_{k,m} (d mu / d theta_i)^H (d mu / d theta_j).

The derivatives here are central finite differences of the explicit mean, so
this module never touches the closed-form expressions it is used to check.

The receive model is ``h = g * b(theta_R)`` with ``g`` held constant. The
transmit beam is assumed steered at the target with a flat maximum, so its
derivative with respect to the DoA is zero and only the receive array carries
angle information.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .fisher import PARAM_NAMES, Fim5, ParameterVector
from .model import RadioParams, SensingLink, WaveformParams, steering_vector


@dataclass(frozen=True)
class MeanSignalSpec:
    params: ParameterVector
    waveform: WaveformParams
    gain: float
    num_rx: int

    def __post_init__(self):
        if self.gain < 0:
            raise DomainError("receive gain must be non-negative")
        if self.num_rx < 1:
            raise DomainError("need at least one receive element")


def spec_from_link(params: ParameterVector, link: SensingLink, waveform: WaveformParams,
                   radio: RadioParams) -> tuple[MeanSignalSpec, float]:
    """Mean-signal spec whose per-element SNR equals ``link.snr``; returns ``(spec, noise_var)``."""
    noise_var = radio.noise_psd * waveform.subcarrier_spacing
    gain = math.sqrt(link.snr * noise_var) / params.amplitude
    return MeanSignalSpec(params, waveform, gain, radio.num_rx_antennas), noise_var


def _mean_grid(theta: np.ndarray, waveform: WaveformParams, gain: float, num_rx: int) -> np.ndarray:
    amplitude, phase, doppler, delay, doa = theta
    k = np.arange(waveform.num_subcarriers)[:, None]
    m = np.arange(waveform.num_symbols)[None, :]
    beta = amplitude * np.exp(1j * (phase + 2.0 * math.pi * m * waveform.symbol_duration_total * doppler
                                    - 2.0 * math.pi * k * waveform.subcarrier_spacing * delay))
    return beta[:, :, None] * (gain * steering_vector(doa, num_rx))[None, None, :]


def mean_signal(spec: MeanSignalSpec, k: int, m: int) -> np.ndarray:
    """Noiseless received vector on subcarrier ``k`` of symbol ``m``."""
    if not (0 <= k < spec.waveform.num_subcarriers and 0 <= m < spec.waveform.num_symbols):
        raise IndexError(f"(k, m) = ({k}, {m}) out of range")
    p = spec.params
    beta = p.amplitude * np.exp(1j * (p.phase
                                      + 2.0 * math.pi * m * spec.waveform.symbol_duration_total * p.doppler
                                      - 2.0 * math.pi * k * spec.waveform.subcarrier_spacing * p.delay))
    return beta * spec.gain * steering_vector(p.doa, spec.num_rx)


def mean_signal_grid(spec: MeanSignalSpec) -> np.ndarray:
    """All mean vectors, shape ``(K, M, N_R)``."""
    return _mean_grid(spec.params.as_array(), spec.waveform, spec.gain, spec.num_rx)


def default_steps(spec: MeanSignalSpec) -> np.ndarray:
    """Step sizes that keep every phase increment well below one radian."""
    w = spec.waveform
    return np.array([
        1e-6 * spec.params.amplitude,
        1e-6,
        1e-4 / (w.num_symbols * w.symbol_duration_total),
        1e-4 / (w.num_subcarriers * w.subcarrier_spacing),
        1e-6,
    ])


def fim_numeric(spec: MeanSignalSpec, noise_var: float, steps=None,
                normalized: bool = False) -> Fim5:
    """Central-difference Fisher matrix of the mean signal.

    With ``normalized=True`` the matrix is divided by Gamma, giving information
    per unit Gamma independent of the link budget (undefined for zero gain).
    """
    if not noise_var > 0:
        raise DomainError("noise variance must be positive")
    theta0 = spec.params.as_array()
    steps = default_steps(spec) if steps is None else np.asarray(steps, dtype=float)
    if steps.shape != (5,) or np.any(steps <= 0):
        raise DomainError("need five positive step sizes")

    derivs = []
    for i in range(5):
        up, down = theta0.copy(), theta0.copy()
        up[i] += steps[i]
        down[i] -= steps[i]
        with np.errstate(invalid="ignore", over="ignore"):
            d = (_mean_grid(up, spec.waveform, spec.gain, spec.num_rx)
                 - _mean_grid(down, spec.waveform, spec.gain, spec.num_rx)) / (2.0 * steps[i])
        if not np.all(np.isfinite(d)):
            raise NumericalError(f"non-finite derivative for {PARAM_NAMES[i]} "
                                 f"with step {steps[i]:.3g}")
        derivs.append(d.ravel())
    d = np.stack(derivs)
    info = (2.0 / noise_var) * np.real(d.conj() @ d.T)
    info = 0.5 * (info + info.T)

    w = spec.waveform
    snr = (spec.params.amplitude * spec.gain) ** 2 / noise_var
    gamma = snr * spec.num_rx * w.num_subcarriers * w.num_symbols
    if normalized:
        if gamma == 0:
            raise DomainError("cannot normalize a zero-information matrix")
        return Fim5(info / gamma, 1.0)
    return Fim5(info, gamma)


@dataclass(frozen=True)
class FimComparison:
    max_rel_error: float
    entry: tuple[int, int]
    tolerance: float
    errors: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(self.max_rel_error < self.tolerance)

    @property
    def entry_name(self) -> str:
        i, j = self.entry
        return f"({PARAM_NAMES[i]}, {PARAM_NAMES[j]})"


def compare_fim(closed: Fim5 | np.ndarray, numeric: Fim5 | np.ndarray,
                tolerance: float = 1e-4) -> FimComparison:
    """Entrywise relative error of ``numeric`` against ``closed``.

    Nonzero reference entries use plain relative error, with the denominator
    floored at ``1e-15 * max|closed|``. Entries that are exactly zero in the
    reference are scaled by ``sqrt(|closed_ii * closed_jj|)`` instead: the rows
    carry different units, so a floor tied to the largest entry would make the
    zero-entry test depend on whether delay is expressed in seconds or ns.
    """
    a = np.asarray(closed.matrix if isinstance(closed, Fim5) else closed, dtype=float)
    b = np.asarray(numeric.matrix if isinstance(numeric, Fim5) else numeric, dtype=float)
    floor = 1e-15 * np.max(np.abs(a))
    diag = np.abs(np.diag(a))
    zero_scale = np.sqrt(np.outer(diag, diag))
    denom = np.maximum(np.where(a != 0, np.abs(a), zero_scale), floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.where(denom > 0, np.abs(b - a) / denom, np.where(b == a, 0.0, np.inf))
    idx = np.unravel_index(int(np.argmax(err)), err.shape)
    return FimComparison(float(err[idx]), (int(idx[0]), int(idx[1])), tolerance, err)


@dataclass(frozen=True)
class OracleDraw:
    """One randomized configuration for the closed-form vs. oracle check."""

    num_subcarriers: int
    num_symbols: int
    num_rx: int
    params: ParameterVector
    snr: float
    subcarrier_spacing: float
    cp_duration: float

    def to_dict(self) -> dict:
        p = self.params
        return {
            "K": self.num_subcarriers, "M": self.num_symbols, "N_R": self.num_rx,
            "alpha": p.amplitude, "phi_rad": p.phase, "f_D_Hz": p.doppler,
            "tau_s": p.delay, "theta_R_rad": p.doa, "snr": self.snr,
            "delta_f_Hz": self.subcarrier_spacing, "T_CP_s": self.cp_duration,
        }


def random_draw(rng: np.random.Generator, subcarrier_spacing: float = 120e3,
                cp_duration: float = 0.0) -> OracleDraw:
    """K in [2, 64], M in [2, 32], N_R in [2, 16], |DoA| < 80 deg, SNR in [1e-6, 10]."""
    K = int(rng.integers(2, 65))
    M = int(rng.integers(2, 33))
    N = int(rng.integers(2, 17))
    ts = 1.0 / subcarrier_spacing + cp_duration
    params = ParameterVector(
        amplitude=float(rng.uniform(0.1, 10.0)),
        phase=float(rng.uniform(-math.pi, math.pi)),
        doppler=float(rng.uniform(-0.25, 0.25) / ts),
        delay=float(rng.uniform(0.0, 0.5) / subcarrier_spacing),
        doa=math.radians(float(rng.uniform(-80.0, 80.0))),
    )
    snr = float(10.0 ** rng.uniform(-6.0, 1.0))
    return OracleDraw(K, M, N, params, snr, subcarrier_spacing, cp_duration)


def check_draw(draw: OracleDraw, tolerance: float = 1e-4, steps=None) -> FimComparison:
    from .fisher import fim_closed_form

    waveform = WaveformParams(draw.num_subcarriers, draw.num_symbols,
                              draw.subcarrier_spacing, draw.cp_duration)
    # only N_R and N_0 matter here; the link budget is replaced by draw.snr
    radio = RadioParams(draw.num_rx, 28e9, 1.0, 4e-20, 1.0)
    link = SensingLink(1.0, draw.params.doa, draw.params.amplitude ** 2, draw.snr)
    spec, noise_var = spec_from_link(draw.params, link, waveform, radio)
    closed = fim_closed_form(draw.params, link, waveform, radio)
    return compare_fim(closed, fim_numeric(spec, noise_var, steps), tolerance)


@dataclass
class ValidationReport:
    seed: int
    tolerance: float
    errors: list[float]
    worst_draw: int
    worst: FimComparison
    draw: OracleDraw

    @property
    def passed(self) -> bool:
        return all(e < self.tolerance for e in self.errors)

    @property
    def failures(self) -> int:
        return sum(e >= self.tolerance for e in self.errors)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "draws": len(self.errors),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "failures": self.failures,
            "worst_error": self.worst.max_rel_error,
            "worst_draw": self.worst_draw,
            "worst_entry": self.worst.entry_name,
            "draw": self.draw.to_dict(),
        }


def validate(draws: int = 100, tolerance: float = 1e-4, seed: int = 0,
             subcarrier_spacing: float = 120e3, cp_duration: float = 0.0) -> ValidationReport:
    """Compare closed form and oracle over ``draws`` seeded random configurations."""
    if draws < 1:
        raise DomainError("need at least one draw")
    rng = np.random.default_rng(seed)
    errors, worst, worst_i, worst_draw = [], None, 0, None
    for i in range(draws):
        d = random_draw(rng, subcarrier_spacing, cp_duration)
        cmp = check_draw(d, tolerance)
        errors.append(cmp.max_rel_error)
        if worst is None or cmp.max_rel_error > worst.max_rel_error:
            worst, worst_i, worst_draw = cmp, i, d
    return ValidationReport(seed, tolerance, errors, worst_i, worst, worst_draw)
