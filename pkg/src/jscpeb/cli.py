"""Command-line interface.

Exit codes: 0 ok, 2 config error, 3 domain error, 4 I/O error, 5 validation
failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import GridSpec, HeatmapResult, coverage_fraction, heatmap, sweep
from .config import ScenarioFile, bundled_config, load_config, to_config
from .errors import ConfigError, DomainError, PebError
from .network import fuse_efim
from .oracle import validate

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_IO, EXIT_VALIDATION = 0, 2, 3, 4, 5


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _jsonable(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False)


def _write_atomic(path: Path, data: bytes | str) -> None:
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "\n"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(path: str) -> ScenarioFile:
    p = Path(path)
    if not p.exists() and os.sep not in path:
        try:
            p = bundled_config(path)
        except ConfigError:
            pass
    return load_config(p)


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:.9g}"


def _values(spec: str) -> list[float]:
    """``a,b,c`` or ``start:stop:count`` (count points, endpoints included)."""
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("range must be start:stop:count", "--values")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"bad range {spec!r}", "--values") from None
        if n < 1:
            raise ConfigError("count must be positive", "--values")
        return [float(v) for v in np.linspace(lo, hi, n)]
    try:
        return [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad value list {spec!r}", "--values") from None


def _thresholds(spec: str | None, default) -> tuple[float, ...]:
    if spec is None:
        return tuple(default)
    vals = _values(spec)
    if any(not v > 0 for v in vals):
        raise ConfigError("thresholds must be positive", "--threshold")
    return tuple(vals)


# --- point ------------------------------------------------------------------

def point_report(sf: ScenarioFile, x: float, y: float) -> dict:
    res = fuse_efim(sf.scenario, (x, y))
    stations = []
    for i, (bs, link, fov, contrib) in enumerate(zip(sf.scenario.stations, res.links,
                                                       res.in_fov, res.contributions)):
        stations.append({
            "index": i + 1,
            "x_m": bs.x, "y_m": bs.y,
            "rotation_deg": math.degrees(bs.rotation),
            "range_m": link.range,
            "local_doa_deg": math.degrees(link.local_doa),
            "snr_db": link.snr_db,
            "in_fov": fov,
            "efim": contrib.tolist(),
        })
    return {"x_m": x, "y_m": y, "peb_m": res.peb, "efim": res.efim.tolist(), "stations": stations}


def _render_point(rep: dict) -> str:
    lines = [f"target: ({rep['x_m']!r}, {rep['y_m']!r}) m",
             f"PEB: {_fmt_exact(rep['peb_m'])} m",
             "fused EFIM [1/m^2]:"]
    for row in rep["efim"]:
        lines.append("  " + "  ".join(_fmt_exact(v) for v in row))
    for s in rep["stations"]:
        lines.append(
            f"station {s['index']} at ({s['x_m']!r}, {s['y_m']!r}): "
            f"range {_fmt_exact(s['range_m'])} m, local DoA {_fmt_exact(s['local_doa_deg'])} deg, "
            f"SNR {_fmt_exact(s['snr_db'])} dB" + ("" if s["in_fov"] else " (outside field of view)"))
    return "\n".join(lines)


def _fmt_exact(v: float) -> str:
    # repr round-trips, so the text and --json outputs carry identical values
    return "inf" if math.isinf(v) else repr(float(v))


def cmd_point(args) -> int:
    sf = _load(args.config)
    rep = point_report(sf, args.x, args.y)
    print(_dumps(rep) if args.json else _render_point(rep))
    return EXIT_OK


# --- heatmap / coverage -------------------------------------------------------

def heatmap_csv(hm: HeatmapResult) -> str:
    xs, ys = hm.grid.xs, hm.grid.ys
    rows = ["x_m,y_m,peb_m"]
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            v = "excluded" if hm.excluded[iy, ix] else _fmt(float(hm.peb[iy, ix]))
            rows.append(f"{_fmt(float(x))},{_fmt(float(y))},{v}")
    return "\n".join(rows) + "\n"


def heatmap_pgm(hm: HeatmapResult, bounds: tuple[float, float]) -> bytes:
    """16-bit binary PGM of log10(PEB); dark is accurate, white is no information."""
    lo, hi = math.log10(bounds[0]), math.log10(bounds[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        level = (np.log10(hm.peb) - lo) / (hi - lo)
    level = np.clip(level, 0.0, 1.0)
    level = np.where(np.isfinite(hm.peb), level, 1.0)
    img = np.rint(level * 65535).astype(">u2")[::-1]  # first image row is the top (max y)
    header = f"P5\n{hm.grid.nx} {hm.grid.ny}\n65535\n".encode("ascii")
    return header + img.tobytes()


def _probe_summary(sf: ScenarioFile) -> list[dict]:
    out = []
    for x, y in sf.probe_points:
        try:
            res = fuse_efim(sf.scenario, (x, y))
            out.append({"x_m": x, "y_m": y, "peb_m": res.peb, "snr_db": res.snr_db})
        except DomainError as exc:
            out.append({"x_m": x, "y_m": y, "error": str(exc)})
    return out


def _apply_grid(sf: ScenarioFile, n: int | None) -> ScenarioFile:
    if n is None:
        return sf
    g = sf.grid
    return replace(sf, grid=GridSpec(g.x_min, g.x_max, g.y_min, g.y_max, n, n))


def heatmap_summary(sf: ScenarioFile, hm: HeatmapResult, thresholds) -> dict:
    summary = {"scenario": to_config(sf)}
    summary.update(hm.summary(thresholds))
    summary["probes"] = _probe_summary(sf)
    return summary


def cmd_heatmap(args) -> int:
    sf = _apply_grid(_load(args.config), args.grid)
    thresholds = _thresholds(args.threshold, sf.thresholds)
    hm = heatmap(sf.scenario, sf.grid)
    prefix = Path(args.out)
    summary = heatmap_summary(sf, hm, thresholds)
    _write_atomic(prefix.with_name(prefix.name + ".csv"), heatmap_csv(hm))
    _write_atomic(prefix.with_name(prefix.name + ".json"), _dumps(summary) + "\n")
    if args.pgm:
        lo, hi = sf.pgm_bounds
        _write_atomic(prefix.with_name(prefix.name + ".pgm"), heatmap_pgm(hm, sf.pgm_bounds))
        _write_atomic(prefix.with_name(prefix.name + ".pgm.txt"),
                      f"log10 PEB scale, 16-bit gray, dark = low PEB\n"
                      f"black_peb_m={lo!r}\nwhite_peb_m={hi!r}\n"
                      f"no information and excluded cells are white\n")
    print(f"grid {sf.grid.nx}x{sf.grid.ny}, max PEB {_fmt(hm.max_peb)} m, "
          f"mean PEB {_fmt(hm.mean_peb)} m, excluded {hm.num_excluded} cells")
    for t in thresholds:
        print(f"coverage at PEB <= {t:g} m: {coverage_fraction(hm, t):.6f}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    sf = _apply_grid(_load(args.config), args.grid)
    thresholds = _thresholds(args.threshold, sf.thresholds)
    hm = heatmap(sf.scenario, sf.grid)
    cov = {repr(t): coverage_fraction(hm, t) for t in thresholds}
    if args.json:
        print(_dumps({"max_peb_m": hm.max_peb, "mean_peb_m": hm.mean_peb, "coverage": cov}))
    else:
        for t in thresholds:
            print(f"{t:g},{coverage_fraction(hm, t):.6f}")
    return EXIT_OK


# --- sweep ------------------------------------------------------------------

def cmd_sweep(args) -> int:
    sf = _load(args.config)
    if args.param is not None:
        param = args.param
    elif sf.sweep is not None:
        param = sf.sweep.param
    else:
        raise ConfigError("no --param given and config has no sweep section")
    if args.values is not None:
        values = _values(args.values)
    elif sf.sweep is not None and args.param in (None, sf.sweep.param):
        values = list(sf.sweep.values)
    else:
        raise ConfigError("no --values given", "--values")
    if args.target is not None:
        target = tuple(args.target)
    elif sf.target is not None:
        target = sf.target
    else:
        raise ConfigError("no target in config and no --target given", "target")
    curve = sweep(sf.scenario, target, param, values)
    rows = ["value,peb_m"]
    for pt in curve:
        rows.append(f"{_fmt(pt.value)},{'error' if pt.error else _fmt(pt.peb)}")
        if pt.error:
            print(f"warning: {param}={pt.value:g}: {pt.error}", file=sys.stderr)
    text = "\n".join(rows) + "\n"
    if args.out:
        _write_atomic(Path(args.out), text)
    print(text, end="")
    return EXIT_OK


# --- validate -----------------------------------------------------------------

def cmd_validate(args) -> int:
    df, cp = 120e3, 0.0
    if args.config:
        w = _load(args.config).scenario.waveform
        df, cp = w.subcarrier_spacing, w.cp_duration
    rep = validate(args.draws, args.tolerance, args.seed, df, cp)
    d = rep.to_dict()
    if args.json:
        print(_dumps(d))
    else:
        print(f"draws {d['draws']}, seed {d['seed']}, tolerance {d['tolerance']!r}")
        print(f"worst relative error {d['worst_error']!r} at draw {d['worst_draw']} "
              f"entry {d['worst_entry']}")
        print("PASS" if rep.passed else f"FAIL ({d['failures']} draws over tolerance)")
    if not rep.passed:
        print("offending draw: " + json.dumps(d["draw"]), file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jscpeb", description="Position error bounds for cooperative MIMO-OFDM sensing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="PEB and per-station diagnostics at one position")
    p.add_argument("config", help="scenario JSON file or bundled config name")
    p.add_argument("x", type=float)
    p.add_argument("y", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("heatmap", help="PEB grid to CSV, JSON summary and optional PGM")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output path prefix")
    p.add_argument("--grid", type=int, help="points per axis (overrides config)")
    p.add_argument("--threshold", help="coverage thresholds in m, comma list")
    p.add_argument("--pgm", action="store_true", help="also write a PGM image")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("coverage", help="coverage fractions at PEB thresholds")
    p.add_argument("config")
    p.add_argument("--grid", type=int)
    p.add_argument("--threshold")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("sweep", help="PEB at a fixed target versus one parameter")
    p.add_argument("config")
    p.add_argument("--param", choices=["K", "NR", "N_R", "rho", "NBS", "N_BS"])
    p.add_argument("--values", help="comma list or start:stop:count")
    p.add_argument("--target", type=float, nargs=2, metavar=("X", "Y"))
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="closed-form FIM against the numerical oracle")
    p.add_argument("config", nargs="?", help="takes subcarrier spacing and CP from this file")
    p.add_argument("--draws", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, PebError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
