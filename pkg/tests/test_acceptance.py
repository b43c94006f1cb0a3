"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The lines are collected in RESULTS and printed by the terminal-summary hook in
conftest.py, so they appear whether or not output capture is on.
"""
import functools
import math
import time
from dataclasses import replace

import numpy as np

from jscpeb.analysis import GridSpec, heatmap, sweep
from jscpeb.cli import main
from jscpeb.config import bundled_config, load_config
from jscpeb.fisher import (ParameterVector, crlb_closed_form, crlb_from_fim, efim_polar_closed,
                           fim_closed_form, schur_efim)
from jscpeb.geometry import BaseStation, LocalCoords, efim_position_closed, efim_position_local
from jscpeb.linalg import checked_inv
from jscpeb.model import RadioParams, SensingLink, WaveformParams
from jscpeb.network import Scenario, fuse_efim
from jscpeb.oracle import validate

RESULTS: list[str] = []


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except Exception as exc:
                RESULTS.append(f"FAIL  criterion {number} ({title}): {exc}".splitlines()[0])
                raise
            RESULTS.append(f"PASS  criterion {number} ({title}): {detail} "
                           f"[{time.perf_counter() - t0:.2f} s]")
        return run
    return wrap


def scenario(name):
    return load_config(bundled_config(name))


@criterion(1, "oracle equivalence")
def test_oracle_equivalence():
    t0 = time.perf_counter()
    rep = validate(draws=100, tolerance=1e-4, seed=0)
    elapsed = time.perf_counter() - t0
    assert rep.passed, f"{rep.failures} of 100 draws exceed 1e-4, worst {rep.worst.max_rel_error:.3g}"
    assert elapsed < 30, f"runtime {elapsed:.1f} s"
    return f"worst relative error {rep.worst.max_rel_error:.2e} over 100 draws (tolerance 1e-4)"


@criterion(2, "closed-form self-consistency")
def test_closed_form_consistency():
    rng = np.random.default_rng(2)
    worst = dict.fromkeys(("crlb", "schur", "jacobian", "identity"), 0.0)
    t0 = time.perf_counter()
    for _ in range(500):
        K, M, N = int(rng.integers(2, 2049)), int(rng.integers(2, 257)), int(rng.integers(2, 129))
        snr = 10 ** rng.uniform(-7, 2)
        doa = rng.uniform(-1.4, 1.4)
        r = rng.uniform(10, 400)
        alpha = rng.uniform(0.1, 10)
        w = WaveformParams(K, M, 120e3, 0.586e-6)
        radio = RadioParams(N, 28e9, 1.0, 4e-20, 0.1)
        link = SensingLink(r, doa, alpha ** 2, snr)
        params = ParameterVector(alpha, rng.uniform(-math.pi, math.pi), rng.uniform(-1e3, 1e3),
                                 2 * r / 299792458.0, doa)
        fim = fim_closed_form(params, link, w, radio)

        closed_crlb = crlb_closed_form(link, w, radio, params).as_array()
        worst["crlb"] = max(worst["crlb"], np.max(np.abs(crlb_from_fim(fim) / closed_crlb - 1)))

        e = schur_efim(fim).matrix
        closed = efim_polar_closed(link, w, radio).matrix
        scale = np.sqrt(np.outer(np.diag(closed), np.diag(closed)))
        worst["schur"] = max(worst["schur"], np.max(np.abs(e - closed) / scale))

        full_inv = checked_inv(fim.matrix, equilibrate=True)
        block = full_inv[3:, 3:]
        inv_e = np.linalg.inv(e)
        s = np.sqrt(np.outer(np.diag(block), np.diag(block)))
        worst["identity"] = max(worst["identity"], np.max(np.abs(inv_e - block) / s))

        loc = LocalCoords.from_xy(r * math.cos(doa), r * math.sin(doa))
        product = efim_position_local(closed, loc)
        cart = efim_position_closed(link, w, radio, loc)
        s = np.sqrt(np.outer(np.diag(cart), np.diag(cart)))
        worst["jacobian"] = max(worst["jacobian"], np.max(np.abs(product - cart) / s))
    elapsed = time.perf_counter() - t0
    bad = {k: v for k, v in worst.items() if not v <= 1e-10}
    assert not bad, f"above 1e-10: {bad}"
    assert elapsed < 10, f"runtime {elapsed:.1f} s"
    return "500 draws, worst " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tolerance 1e-10)"


@criterion(3, "network heatmap reproduction")
def test_heatmap_reproduction():
    t0 = time.perf_counter()
    grid = GridSpec()
    two = {name: heatmap(scenario(name).scenario, grid).max_peb
           for name in ("fig2a_diagonal", "fig2a_adjacent")}
    matching = {k: v for k, v in two.items() if 0.19 <= v <= 0.31}
    assert matching, f"no 2-station variant in [0.19, 0.31] m: {two}"
    name, base = next(iter(matching.items()))
    three = heatmap(scenario("fig2b").scenario, grid).max_peb
    four = heatmap(scenario("table1").scenario, grid).max_peb
    red3, red4 = 1 - three / base, 1 - four / base
    elapsed = time.perf_counter() - t0
    detail = (f"2-BS ({name}) max {base:.4f} m, 3-BS {three:.4f} m ({red3:.1%} lower), "
              f"4-BS {four:.4f} m ({red4:.1%} lower)")
    assert 0.20 <= red3 <= 0.40, "3-BS reduction outside [20%, 40%]: " + detail
    assert 0.50 <= red4 <= 0.70, "4-BS reduction outside [50%, 70%]: " + detail
    assert elapsed < 60, f"runtime {elapsed:.1f} s"
    return detail


@criterion(4, "parameter sweeps")
def test_parameter_sweeps():
    t0 = time.perf_counter()
    sf = scenario("table1")
    full, target = sf.scenario, (50.0, 50.0)
    values = {
        "K": [16, 32, 64, 128, 256, 512, 744, 1024, 2048, 3300],
        "N_R": [2, 4, 8, 16, 32, 64, 128, 180, 200, 264],
        "rho": list(np.linspace(0.05, 1.0, 20)),
    }
    for n in range(1, 5):
        sc = full.with_stations(n)
        for param, vals in values.items():
            pebs = [p.peb for p in sweep(sc, target, param, vals)]
            rises = [(vals[i], vals[i + 1]) for i in range(len(pebs) - 1) if pebs[i + 1] > pebs[i]]
            assert not rises, f"PEB rises along {param} with {n} BS at {rises}"
    over = []
    for n in (3, 4):
        for nr, pt in zip((180, 200, 264), sweep(full.with_stations(n), target, "N_R", [180, 200, 264])):
            if not pt.peb < 0.01:
                over.append(f"N_BS={n}, N_R={nr}: {pt.peb:.6f} m")
    elapsed = time.perf_counter() - t0
    assert not over, "monotone sweeps hold; PEB not below 0.01 m for " + "; ".join(over)
    assert elapsed < 30, f"runtime {elapsed:.1f} s"
    return "all sweeps monotone for N_BS 1..4; PEB < 0.01 m for N_BS >= 3, N_R >= 180"


@criterion(5, "property suite")
def test_properties():
    table = scenario("table1").scenario
    w, radio = table.waveform, table.radio
    rng = np.random.default_rng(5)

    def random_station():
        return BaseStation(rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(-math.pi, math.pi))

    def far_point(stations):
        while True:
            p = (rng.uniform(0, 100), rng.uniform(0, 100))
            if all(math.hypot(p[0] - b.x, p[1] - b.y) > 2 for b in stations):
                return p

    # (i) adding a station never increases the PEB
    for _ in range(1000):
        stations = [random_station() for _ in range(int(rng.integers(1, 4)))]
        extra = random_station()
        p = far_point(stations + [extra])
        before = fuse_efim(Scenario(stations, w, radio), p).peb
        after = fuse_efim(Scenario(stations + [extra], w, radio), p).peb
        assert after <= before * (1 + 1e-12), f"PEB rose from {before} to {after} at {p}"

    # (ii) rigid motion of the whole network and target
    worst_rigid = 0.0
    for _ in range(200):
        stations = [random_station() for _ in range(int(rng.integers(1, 5)))]
        p = far_point(stations)
        ang, tx, ty = rng.uniform(-math.pi, math.pi), rng.uniform(-500, 500), rng.uniform(-500, 500)
        c, s = math.cos(ang), math.sin(ang)
        move = lambda x, y: (c * x - s * y + tx, s * x + c * y + ty)
        moved = [BaseStation(*move(b.x, b.y), b.rotation + ang) for b in stations]
        a = fuse_efim(Scenario(stations, w, radio), p).peb
        b = fuse_efim(Scenario(moved, w, radio), move(*p)).peb
        if math.isfinite(a):
            worst_rigid = max(worst_rigid, abs(b / a - 1))
        else:
            assert b == a
    assert worst_rigid <= 1e-9, f"rigid-motion deviation {worst_rigid:.2e}"

    # (iii) the four-corner square heatmap has the square's symmetries
    hm = heatmap(table, GridSpec())
    finite = np.isfinite(hm.peb)
    worst_sym = 0.0
    for image in (hm.peb[:, ::-1], hm.peb[::-1, :], hm.peb.T):
        assert np.array_equal(finite, np.isfinite(image))
        worst_sym = max(worst_sym, np.max(np.abs(image[finite] / hm.peb[finite] - 1)))
    assert worst_sym <= 1e-9, f"symmetry deviation {worst_sym:.2e}"

    # (iv) PEB scales as rho^-1/2
    worst_rho = 0.0
    for rho in (0.01, 0.2, 0.5, 1.0):
        scaled = replace(table, radio=replace(radio, sensing_power_fraction=rho))
        for p in ((50, 50), (20, 70), (90, 10)):
            ratio = fuse_efim(scaled, p).peb / fuse_efim(table, p).peb
            worst_rho = max(worst_rho, abs(ratio / math.sqrt(0.1 / rho) - 1))
    assert worst_rho <= 1e-12, f"rho scaling deviation {worst_rho:.2e}"

    # (v) endfire: one station has no angle information, a second restores it
    endfire = BaseStation(0, 0, 0.0)
    single = fuse_efim(Scenario([endfire], w, radio), (0, 50)).peb
    pair = fuse_efim(Scenario([endfire, BaseStation(100, 50, math.pi)], w, radio), (0, 50)).peb
    assert single == math.inf and math.isfinite(pair)
    return (f"monotone in 1000 pairs, rigid {worst_rigid:.1e}, symmetry {worst_sym:.1e}, "
            f"rho scaling {worst_rho:.1e}, endfire single inf / pair {pair:.4f} m")


@criterion(6, "determinism")
def test_determinism(tmp_path, capsys):
    for run in ("a", "b"):
        assert main(["heatmap", "table1", "--out", str(tmp_path / run)]) == 0
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b, "heatmap CSV differs between runs"
    capsys.readouterr()
    reports = []
    for _ in range(2):
        assert main(["validate", "--seed", "11", "--json"]) == 0
        reports.append(capsys.readouterr().out)
    assert reports[0] == reports[1], "validate report differs between runs"
    return f"heatmap CSV identical ({len(a)} bytes), validate --seed 11 report identical"
