import math
from datetime import datetime, timezone

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ilclab.constellation import (R_EARTH_KM, SatelliteId, TimeGrid, ValidationError, WalkerSpec,
                                  build_constellation, latitude_delta, load_presets, orbital_period,
                                  preset_pairs, propagate, resolve_layer)


def test_presets_match_reference_counts(presets):
    gs, ce = presets["globalstar"], presets["celestri"]
    assert (gs.n_sats, gs.planes, gs.sats_per_plane, gs.altitude_km, gs.inclination_deg) == (48, 8, 6, 1414, 52)
    assert (ce.n_sats, ce.planes, ce.sats_per_plane) == (63, 7, 9)
    assert preset_pairs()["globalstar-celestri"] == ("globalstar", "celestri")


def test_walker_parse_roundtrip():
    spec = WalkerSpec.parse("48/8/1:1414:52")
    assert (spec.planes, spec.sats_per_plane, spec.phase_factor) == (8, 6, 1)
    assert spec.label() == "48/8/1:1414:52"
    assert resolve_layer("63/7/1:1400:48").n_sats == 63


@pytest.mark.parametrize("kwargs,field", [
    (dict(planes=0, sats_per_plane=4, altitude_km=500, inclination_deg=50), "planes"),
    (dict(planes=2, sats_per_plane=0, altitude_km=500, inclination_deg=50), "sats_per_plane"),
    (dict(planes=2, sats_per_plane=4, altitude_km=-1, inclination_deg=50), "altitude_km"),
    (dict(planes=2, sats_per_plane=4, altitude_km=500, inclination_deg=0), "inclination_deg"),
    (dict(planes=2, sats_per_plane=4, altitude_km=500, inclination_deg=50, phase_factor=4), "phase_factor"),
])
def test_spec_validation_names_field(kwargs, field):
    with pytest.raises(ValidationError) as exc:
        WalkerSpec(**kwargs)
    assert exc.value.field == field


def test_parse_rejects_garbage():
    with pytest.raises(ValidationError):
        WalkerSpec.parse("48-8-1")
    with pytest.raises(ValidationError):
        WalkerSpec.parse("50/8/1:1414:52")


def test_walker_phasing_layout():
    spec = WalkerSpec(8, 6, 1414, 52, 1)
    layer = build_constellation(spec)
    assert layer.n_sats == 48
    np.testing.assert_allclose(layer.raan_deg[::6], 360.0 * np.arange(8) / 8)
    # plane p, slot s: 360 s / S + 360 F p / N
    p, s = 3, 2
    assert layer.anomaly_deg[p * 6 + s] == pytest.approx(360 * s / 6 + 360 * 1 * p / 48)
    slot_layer = build_constellation(spec, phasing="slot")
    assert slot_layer.anomaly_deg[p * 6 + s] == pytest.approx((360 * s / 6 + 360 * p / 6) % 360)


def test_single_satellite_layer():
    layer = build_constellation(WalkerSpec(1, 1, 500, 50, 0))
    assert layer.n_sats == 1 and layer.raan_deg[0] == 0 and layer.anomaly_deg[0] == 0


def test_period_kepler():
    a = R_EARTH_KM + 1414
    expected = 2 * math.pi * math.sqrt(a ** 3 / 398600.4418)
    assert orbital_period(1414) == pytest.approx(expected)
    assert orbital_period(1414) == pytest.approx(6836.0, abs=1.0)


def test_epoch_latitude_zero_and_periodicity():
    spec = WalkerSpec(1, 1, 1414, 52, 0)
    layer = build_constellation(spec)
    T = orbital_period(1414)
    eph = propagate(layer, TimeGrid(slot_seconds=T, n_slots=2), earth_rotation=False)
    assert eph.lat_deg[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(eph.eci_km[0, 1] - eph.eci_km[0, 0]) < 1e-6


def test_inclination_bound_and_constant_radius():
    spec = WalkerSpec(1, 1, 1414, 52, 0)
    T = orbital_period(1414)
    eph = propagate(build_constellation(spec), TimeGrid(slot_seconds=1.0, n_slots=int(T) + 1))
    assert np.abs(eph.lat_deg).max() == pytest.approx(52.0, abs=1e-4)
    np.testing.assert_allclose(eph.alt_km, 1414.0, atol=1e-6)


def test_geodetic_cartesian_consistency(presets):
    eph = propagate(build_constellation(presets["celestri"]), TimeGrid(n_slots=5))
    x = eph.ecef_km
    r = np.linalg.norm(x, axis=-1)
    lat = np.radians(eph.lat_deg)
    lon = np.radians(eph.lon_deg)
    rebuilt = np.stack([r * np.cos(lat) * np.cos(lon), r * np.cos(lat) * np.sin(lon), r * np.sin(lat)], -1)
    np.testing.assert_allclose(rebuilt, x, atol=1e-6)
    np.testing.assert_allclose(np.linalg.norm(eph.eci_km, axis=-1), r)


def test_latitude_delta_signs(presets):
    eph = propagate(build_constellation(presets["globalstar"]), TimeGrid(n_slots=120))
    S = 6
    # (0, 0) starts on the ascending node
    assert latitude_delta(eph, SatelliteId(0, 0, 0), 0) > 0
    recomputed = eph.lat_deg[0, 1] - eph.lat_deg[0, 0]
    assert latitude_delta(eph, 0, 0) == pytest.approx(recomputed)
    assert eph.dlat_deg[0, 0] == pytest.approx(recomputed)
    # at the apex the next step goes down
    apex = int(np.argmax(eph.lat_deg[0]))
    assert latitude_delta(eph, 0, apex) <= 0
    with pytest.raises(IndexError):
        latitude_delta(eph, SatelliteId(0, 1, 0).flat(S), 119)


def test_gmst_changes_longitude_only(presets):
    layer = build_constellation(presets["globalstar"])
    g1 = TimeGrid(datetime(2022, 8, 1, tzinfo=timezone.utc), 60, 3)
    g2 = TimeGrid(datetime(2022, 8, 1, 6, tzinfo=timezone.utc), 60, 3)
    e1, e2 = propagate(layer, g1), propagate(layer, g2)
    np.testing.assert_allclose(e1.lat_deg, e2.lat_deg)
    assert not np.allclose(e1.lon_deg, e2.lon_deg)


@settings(max_examples=40, deadline=None)
@given(P=st.integers(1, 12), S=st.integers(1, 12), F=st.integers(0, 11))
def test_phasing_bijective(P, S, F):
    F = F % S
    layer = build_constellation(WalkerSpec(P, S, 800, 53, F))
    keys = {(round(r, 9), round(a, 9)) for r, a in zip(layer.raan_deg, layer.anomaly_deg)}
    assert len(keys) == P * S


@settings(max_examples=25, deadline=None)
@given(h=st.floats(300, 2000), inc=st.floats(1, 179), slots=st.integers(2, 20))
def test_radius_conserved(h, inc, slots):
    eph = propagate(build_constellation(WalkerSpec(3, 4, h, inc, 1)), TimeGrid(n_slots=slots))
    np.testing.assert_allclose(np.linalg.norm(eph.ecef_km, axis=-1), R_EARTH_KM + h, rtol=1e-12)
    assert np.abs(eph.lat_deg).max() <= min(inc, 180 - inc) + 1e-9


def test_timegrid_validation():
    with pytest.raises(ValidationError):
        TimeGrid(slot_seconds=0)
    with pytest.raises(ValidationError):
        TimeGrid(n_slots=0)


def test_load_presets_has_reduced_pairs():
    p = load_presets()
    assert {"kuiper-b-reduced", "kuiper-c-reduced", "toy-4x4", "toy-3x5"} <= set(p)
