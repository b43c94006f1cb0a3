"""PEB heatmaps over a monitored area, parameter sweeps, and coverage."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, PebError
from .model import Target
from .network import Scenario, fuse_efim, peb_batch

SWEEP_PARAMS = ("K", "N_R", "rho", "N_BS")
_ALIASES = {"K": "K", "NR": "N_R", "N_R": "N_R", "rho": "rho", "NBS": "N_BS", "N_BS": "N_BS"}


@dataclass(frozen=True)
class GridSpec:
    """Sample grid; points are cell centres, including both range endpoints."""

    x_min: float = 0.0
    x_max: float = 100.0
    y_min: float = 0.0
    y_max: float = 100.0
    nx: int = 201
    ny: int = 201

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise DomainError("grid ranges must be non-degenerate")
        if self.nx < 2 or self.ny < 2:
            raise DomainError("grid needs at least 2 points per axis")

    @classmethod
    def from_cell_size(cls, x_min, x_max, y_min, y_max, cell: float) -> "GridSpec":
        nx = int(round((x_max - x_min) / cell)) + 1
        ny = int(round((y_max - y_min) / cell)) + 1
        return cls(x_min, x_max, y_min, y_max, nx, ny)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)


@dataclass
class HeatmapResult:
    """PEB grid indexed ``[iy, ix]``; excluded (near-field) cells hold NaN.

    ``inf`` marks cells where the stations jointly have no position information.
    """

    grid: GridSpec
    peb: np.ndarray
    excluded: np.ndarray

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.peb)

    @property
    def max_peb(self) -> float:
        vals = self.peb[self.finite]
        return float(vals.max()) if vals.size else math.inf

    @property
    def mean_peb(self) -> float:
        vals = self.peb[self.finite]
        return float(vals.mean()) if vals.size else math.inf

    @property
    def num_excluded(self) -> int:
        return int(self.excluded.sum())

    @property
    def num_no_information(self) -> int:
        return int(np.isinf(self.peb).sum())

    def summary(self, thresholds: Iterable[float] = ()) -> dict:
        return {
            "max_peb_m": self.max_peb,
            "mean_peb_m": self.mean_peb,
            "cells": int(self.peb.size),
            "excluded_cells": self.num_excluded,
            "no_information_cells": self.num_no_information,
            "coverage": {repr(float(t)): coverage_fraction(self, t) for t in thresholds},
        }


def _threads() -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get("PEB_THREADS")
    if cap:
        try:
            n = min(n, int(cap))
        except ValueError:
            pass
    return max(1, n)


def heatmap(scenario: Scenario, grid: GridSpec, threads: int | None = None) -> HeatmapResult:
    """Evaluate the fused PEB at every grid point.

    Rows are split across ``threads`` workers (default: CPU count, capped by ``$PEB_THREADS``);
    each cell is independent so the result does not depend on the split.
    """
    xs, ys = grid.xs, grid.ys
    threads = _threads() if threads is None else max(1, threads)
    chunks = np.array_split(np.arange(grid.ny), min(threads, grid.ny))

    def run(rows):
        gx, gy = np.meshgrid(xs, ys[rows])
        return peb_batch(scenario, gx, gy)

    if threads == 1:
        parts = [run(rows) for rows in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    peb = np.concatenate([p for p, _ in parts], axis=0)
    excluded = np.concatenate([m for _, m in parts], axis=0)
    return HeatmapResult(grid, peb, excluded)


def coverage_fraction(hm: HeatmapResult, threshold: float) -> float:
    """Fraction of non-excluded cells whose PEB is at most ``threshold``."""
    valid = ~hm.excluded
    total = int(valid.sum())
    if total == 0:
        return 0.0
    with np.errstate(invalid="ignore"):
        ok = valid & (hm.peb <= threshold)
    return int(ok.sum()) / total


@dataclass(frozen=True)
class SweepPoint:
    value: float
    peb: float
    error: str | None = None


def normalize_param(name: str) -> str:
    try:
        return _ALIASES[name]
    except KeyError:
        raise DomainError(f"unknown sweep parameter {name!r}; expected one of "
                          f"{', '.join(SWEEP_PARAMS)}") from None


def scenario_with(scenario: Scenario, parameter: str, value) -> Scenario:
    """Copy of ``scenario`` with one parameter changed.

    Changing K keeps the total transmit power, so the per-subcarrier power
    P_T/K and hence the SNR fall as K grows.
    """
    parameter = normalize_param(parameter)
    if parameter in ("K", "N_R", "N_BS") and float(value) != int(value):
        raise DomainError(f"{parameter} must be an integer, got {value}")
    if parameter == "K":
        return replace(scenario, waveform=replace(scenario.waveform, num_subcarriers=int(value)))
    if parameter == "N_R":
        return replace(scenario, radio=replace(scenario.radio, num_rx_antennas=int(value)))
    if parameter == "rho":
        if not 0.0 < float(value) <= 1.0:
            raise DomainError("rho must lie in (0, 1]")
        return replace(scenario, radio=replace(scenario.radio, sensing_power_fraction=float(value)))
    return scenario.with_stations(int(value))


def sweep(scenario: Scenario, target: Target | Sequence[float], parameter: str,
          values: Iterable[float]) -> list[SweepPoint]:
    """PEB at a fixed target for each value; bad values yield an error entry."""
    parameter = normalize_param(parameter)
    p = target.position if isinstance(target, Target) else (float(target[0]), float(target[1]))
    rcs = target.rcs if isinstance(target, Target) else scenario.rcs
    base = replace(scenario, rcs=rcs)
    out = []
    for v in values:
        try:
            peb = fuse_efim(scenario_with(base, parameter, v), p).peb
            out.append(SweepPoint(float(v), peb))
        except PebError as exc:
            out.append(SweepPoint(float(v), math.nan, str(exc)))
    return out
