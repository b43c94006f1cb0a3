"""JSON scenario files: parsing, validation, and canonical serialization.

Files use engineering units (dBm, dBi, GHz, kHz, us, degrees); everything is
converted to linear SI units and radians here and nowhere else.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from .analysis import GridSpec, normalize_param
from .errors import ConfigError, DomainError
from .geometry import BaseStation
from .model import RadioParams, Target, WaveformParams
from .network import Scenario

DEFAULT_THRESHOLDS = (0.05, 0.1, 0.25)
DEFAULT_PGM_BOUNDS = (1e-3, 1.0)


def _db(x: float) -> float:
    return 10.0 * math.log10(x)


def _undb(x: float) -> float:
    return 10.0 ** (x / 10.0)


def load_schema() -> dict:
    return json.loads(resources.files("jscpeb").joinpath("data/scenario.schema.json").read_text())


def bundled_config(name: str) -> Path:
    """Path of a shipped example config, e.g. ``"table1"`` or ``"fig2b"``."""
    path = resources.files("jscpeb").joinpath(f"data/{name.removesuffix('.json')}.json")
    if not path.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    return Path(str(path))


@dataclass(frozen=True)
class Sweep:
    param: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    target: Target | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    sweep: Sweep | None = None
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    probe_points: tuple[tuple[float, float], ...] = ()
    pgm_bounds: tuple[float, float] = DEFAULT_PGM_BOUNDS
    description: str = ""


def _location(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def parse_config(data: dict) -> ScenarioFile:
    """Validate a decoded JSON document and build a :class:`ScenarioFile`."""
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, f"key {_location(err)}")

    try:
        w = data["waveform"]
        waveform = WaveformParams(
            num_subcarriers=w["K"],
            num_symbols=w["M"],
            subcarrier_spacing=w["delta_f_kHz"] * 1e3,
            cp_duration=w.get("T_CP_us", 0.0) * 1e-6,
        )
        r = data["radio"]
        tx_gain = _undb(r.get("G_T_dBi", 0.0))
        if "EIRP_dBm" in r:
            power = _undb(r["EIRP_dBm"]) * 1e-3 / tx_gain
        else:
            power = _undb(r["P_T_dBm"]) * 1e-3
        radio = RadioParams(
            num_rx_antennas=r["N_R"],
            carrier_frequency=r["f_c_GHz"] * 1e9,
            total_tx_power=power,
            noise_psd=r["N0_W_per_Hz"],
            sensing_power_fraction=r["rho"],
            tx_array_gain=tx_gain,
            rx_element_gain=_undb(r.get("G_R_dBi", 0.0)),
            num_tx_antennas=r.get("N_T", 16),
        )
        stations = tuple(
            BaseStation(s["x_m"], s["y_m"], math.radians(s["rotation_deg"]),
                        math.radians(s.get("fov_limit_deg", 90.0)))
            for s in data["stations"])
        target = None
        if "target" in data:
            t = data["target"]
            target = Target(t["x_m"], t["y_m"], t.get("rcs_m2", 1.0))
        scenario = Scenario(stations, waveform, radio, target.rcs if target else 1.0)

        grid = GridSpec()
        if "grid" in data:
            g = data["grid"]
            if "points" in g:
                grid = GridSpec(g["x_min_m"], g["x_max_m"], g["y_min_m"], g["y_max_m"],
                                g["points"], g["points"])
            else:
                grid = GridSpec.from_cell_size(g["x_min_m"], g["x_max_m"], g["y_min_m"],
                                               g["y_max_m"], g["cell_m"])
        sweep = None
        if "sweep" in data:
            sweep = Sweep(normalize_param(data["sweep"]["param"]),
                          tuple(float(v) for v in data["sweep"]["values"]))
        out = data.get("output", {})
        bounds = tuple(out.get("pgm_bounds_m", DEFAULT_PGM_BOUNDS))
        if not bounds[1] > bounds[0]:
            raise ConfigError("upper bound must exceed lower bound", "key output.pgm_bounds_m")
    except DomainError as exc:
        raise ConfigError(str(exc)) from None

    return ScenarioFile(
        scenario=scenario,
        target=target,
        grid=grid,
        sweep=sweep,
        thresholds=tuple(float(t) for t in out.get("thresholds_m", DEFAULT_THRESHOLDS)),
        probe_points=tuple((float(p[0]), float(p[1])) for p in out.get("probe_points", ())),
        pgm_bounds=(float(bounds[0]), float(bounds[1])),
        description=data.get("description", ""),
    )


def load_config(path: str | Path) -> ScenarioFile:
    """Read and parse a scenario file. Decode errors carry the line and column."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", str(path))
    return parse_config(data)


def to_config(sf: ScenarioFile) -> dict:
    """Canonical JSON document for ``sf``; :func:`parse_config` inverts it."""
    sc = sf.scenario
    w, r = sc.waveform, sc.radio
    doc = {}
    if sf.description:
        doc["description"] = sf.description
    doc["waveform"] = {
        "K": w.num_subcarriers,
        "M": w.num_symbols,
        "delta_f_kHz": w.subcarrier_spacing / 1e3,
        "T_CP_us": w.cp_duration * 1e6,
    }
    doc["radio"] = {
        "N_T": r.num_tx_antennas,
        "N_R": r.num_rx_antennas,
        "G_T_dBi": _db(r.tx_array_gain),
        "G_R_dBi": _db(r.rx_element_gain),
        "f_c_GHz": r.carrier_frequency / 1e9,
        "EIRP_dBm": _db(r.eirp * 1e3),
        "N0_W_per_Hz": r.noise_psd,
        "rho": r.sensing_power_fraction,
    }
    doc["stations"] = [
        {"x_m": s.x, "y_m": s.y, "rotation_deg": math.degrees(s.rotation),
         "fov_limit_deg": math.degrees(s.fov_limit)}
        for s in sc.stations]
    if sf.target is not None:
        doc["target"] = {"x_m": sf.target.x, "y_m": sf.target.y, "rcs_m2": sf.target.rcs}
    g = sf.grid
    if g.nx == g.ny:
        doc["grid"] = {"x_min_m": g.x_min, "x_max_m": g.x_max, "y_min_m": g.y_min,
                       "y_max_m": g.y_max, "points": g.nx}
    else:
        doc["grid"] = {"x_min_m": g.x_min, "x_max_m": g.x_max, "y_min_m": g.y_min,
                       "y_max_m": g.y_max, "cell_m": (g.x_max - g.x_min) / (g.nx - 1)}
    if sf.sweep is not None:
        doc["sweep"] = {"param": sf.sweep.param, "values": list(sf.sweep.values)}
    doc["output"] = {
        "thresholds_m": list(sf.thresholds),
        "probe_points": [list(p) for p in sf.probe_points],
        "pgm_bounds_m": list(sf.pgm_bounds),
    }
    return doc
