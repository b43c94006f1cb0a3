import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from jscpeb.errors import DomainError, NearFieldError
from jscpeb.fisher import crlb_closed_form, efim_polar_closed, ParameterVector
from jscpeb.geometry import (BaseStation, LocalCoords, crb_position_single, efim_position_closed,
                             efim_position_local, global_to_local, jacobian_polar,
                             jacobian_rotation, local_to_global, wrap_angle)
from jscpeb.model import RadioParams, SensingLink, WaveformParams

from conftest import C

coords = st.floats(-500, 500, allow_nan=False)


def test_identity_transform():
    loc = global_to_local((3, 4), BaseStation(0, 0, 0))
    assert (loc.x, loc.y, loc.range) == (3, 4, 5)
    assert loc.doa == math.atan2(4, 3)


def test_rotation_aligns_diagonal():
    loc = global_to_local((50, 50), BaseStation(0, 0, math.pi / 4))
    assert loc.x == pytest.approx(50 * math.sqrt(2), rel=1e-14)
    assert loc.y == pytest.approx(0.0, abs=1e-12)
    assert loc.doa == pytest.approx(0.0, abs=1e-14)


@given(coords, coords, coords, coords, st.floats(-10, 10))
def test_round_trip_and_distance(x, y, ox, oy, rot):
    bs = BaseStation(ox, oy, rot)
    loc = global_to_local((x, y), bs)
    back = local_to_global(loc, bs)
    assert back == pytest.approx((x, y), abs=1e-12 * max(1.0, abs(x), abs(y), abs(ox), abs(oy)) * 10)
    again = global_to_local(back, bs)
    assert again.x == pytest.approx(loc.x, abs=1e-9)
    assert loc.range == pytest.approx(math.hypot(x - ox, y - oy), rel=1e-12, abs=1e-12)


def test_rotation_normalized():
    assert BaseStation(0, 0, 3 * math.pi).rotation == pytest.approx(math.pi)
    assert BaseStation(0, 0, -math.pi).rotation == math.pi
    assert wrap_angle(-math.pi / 4 + 2 * math.pi) == pytest.approx(-math.pi / 4)


class TestJacobians:
    def test_boresight(self):
        np.testing.assert_allclose(jacobian_polar(LocalCoords.from_xy(10, 0)),
                                   [[2 / C, 0], [0, 1 / 10]])

    def test_ninety_degrees(self):
        np.testing.assert_allclose(jacobian_polar(LocalCoords.from_xy(0, 10)),
                                   [[0, 2 / C], [-1 / 10, 0]])

    @given(coords, coords)
    def test_determinant(self, x, y):
        assume(math.hypot(x, y) > 1e-3)
        loc = LocalCoords.from_xy(x, y)
        assert abs(np.linalg.det(jacobian_polar(loc))) == pytest.approx(2 / (C * loc.range), rel=1e-9)

    def test_origin_rejected(self):
        with pytest.raises(DomainError):
            jacobian_polar(LocalCoords.from_xy(0, 0))

    def test_rotation_special_cases(self):
        np.testing.assert_array_equal(jacobian_rotation(0.0), np.eye(2))
        np.testing.assert_allclose(jacobian_rotation(math.pi / 2), [[0, 1], [-1, 0]], atol=1e-16)

    @given(st.floats(-10, 10))
    def test_rotation_orthonormal(self, rot):
        j = jacobian_rotation(rot)
        np.testing.assert_allclose(j.T @ j, np.eye(2), atol=1e-14)


def _link(snr, loc):
    return SensingLink(loc.range, loc.doa, 1e-15, snr)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 4096), st.integers(2, 256), st.integers(2, 256), st.floats(1e-8, 1e3),
       st.floats(1.5, 400.0), st.floats(-1.5, 1.5))
def test_jacobian_product_matches_closed_form(K, M, N, snr, r, doa):
    w = WaveformParams(K, M, 120e3)
    radio = RadioParams(N, 28e9, 1.0, 4e-20, 0.1)
    loc = LocalCoords.from_xy(r * math.cos(doa), r * math.sin(doa))
    link = _link(snr, loc)
    product = efim_position_local(efim_polar_closed(link, w, radio).matrix, loc)
    closed = efim_position_closed(link, w, radio, loc)
    scale = np.sqrt(np.outer(np.diag(closed), np.diag(closed)))
    np.testing.assert_allclose(product / scale, closed / scale, atol=1e-10)
    np.testing.assert_allclose(np.diag(product), np.diag(closed), rtol=1e-10)


# Tr(E^-1) from matrix entries loses ~log10(cond) digits, so this identity is
# checked where the range/angle information ratio stays moderate.
@settings(max_examples=300, deadline=None)
@given(st.integers(64, 4096), st.integers(2, 256), st.integers(2, 64), st.floats(1e-8, 1e3),
       st.floats(10.0, 400.0), st.floats(-1.4, 1.4))
def test_trace_identity(K, M, N, snr, r, doa):
    w = WaveformParams(K, M, 120e3)
    radio = RadioParams(N, 28e9, 1.0, 4e-20, 0.1)
    loc = LocalCoords.from_xy(r * math.cos(doa), r * math.sin(doa))
    link = _link(snr, loc)
    closed = efim_position_closed(link, w, radio, loc)
    params = ParameterVector(1.0, 0.0, 0.0, 2 * r / C, doa)
    crb = crlb_closed_form(link, w, radio, params)
    trace = np.trace(np.linalg.inv(closed))
    assert trace == pytest.approx(C ** 2 / 4 * crb.delay + r ** 2 * crb.doa, rel=1e-10)
    assert trace == pytest.approx(crb_position_single(link, w, radio, loc), rel=1e-10)


def test_on_axis_closed_form_is_diagonal():
    w = WaveformParams(744, 112, 120e3)
    radio = RadioParams(16, 28e9, 1.0, 4e-20, 0.1)
    loc = LocalCoords.from_xy(40.0, 0.0)
    e = efim_position_closed(_link(1e-4, loc), w, radio, loc)
    assert e[0, 1] == 0.0 and e[1, 0] == 0.0
    xi = math.pi ** 2 * 744 * 112 * 16 * 1e-4 / (6 * C ** 2 * 40.0 ** 4)
    a = 16 * 120e3 ** 2 * (744 ** 2 - 1)
    b = C ** 2 * 255
    assert e[0, 0] == pytest.approx(xi * a * 40.0 ** 4, rel=1e-12)
    assert e[1, 1] == pytest.approx(xi * b * 40.0 ** 2, rel=1e-12)


def test_near_field_rejected():
    w = WaveformParams(4, 4, 1e3)
    radio = RadioParams(4, 28e9, 1.0, 4e-20, 0.1)
    loc = LocalCoords.from_xy(0.3, 0.3)
    with pytest.raises(NearFieldError):
        efim_position_closed(_link(1.0, loc), w, radio, loc)
    with pytest.raises(NearFieldError):
        efim_position_local(np.eye(2), loc)


class TestSingleBsCrb:
    def test_table_peb(self, waveform, radio):
        from jscpeb.model import link_snr, Target
        link = link_snr(Target(50, 50), BaseStation(0, 0, math.pi / 4), waveform, radio)
        crb = crb_position_single(link, waveform, radio)
        assert math.sqrt(crb) == pytest.approx(0.378, abs=5e-4)
        params = ParameterVector(1.0, 0.0, 0.0, 2 * link.range / C, link.local_doa)
        c = crlb_closed_form(link, waveform, radio, params)
        assert math.sqrt(link.range ** 2 * c.doa) == pytest.approx(0.371, abs=1e-3)
        assert math.sqrt(C ** 2 / 4 * c.delay) == pytest.approx(0.0705, abs=5e-4)

    def test_endfire_infinite(self, waveform, radio):
        link = SensingLink(50.0, math.pi / 2, 1e-15, 1e-4)
        assert crb_position_single(link, waveform, radio) == math.inf

    def test_delay_term_range_free_and_scaling(self, waveform, radio):
        near = SensingLink(10.0, 0.0, 0, 1e-4)
        far = SensingLink(1e6, 0.0, 0, 1e-4)
        # with a huge array the angle term vanishes and only the range-free delay term remains
        from dataclasses import replace
        big = replace(radio, num_rx_antennas=10 ** 6)
        a = crb_position_single(near, waveform, big)
        assert crb_position_single(replace(near, range=20.0), waveform, big) == pytest.approx(a, rel=1e-6)
        # quadrupling N_R * SNR with the bracket fixed halves the PEB: scale SNR by 4
        p1 = math.sqrt(crb_position_single(far, waveform, radio))
        p2 = math.sqrt(crb_position_single(replace(far, snr=4e-4), waveform, radio))
        assert p2 == pytest.approx(p1 / 2, rel=1e-14)
