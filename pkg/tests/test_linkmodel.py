import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ilclab.constellation import (R_EARTH_KM, Ephemeris, SatelliteId, TimeGrid, WalkerSpec,
                                  build_constellation, propagate)
from ilclab.linkmodel import (RateParams, build_candidate_set, calibrate_rate_params, inter_distance,
                              is_comoving, is_visible, link_rate, max_los_distance, node_aligned_distance,
                              remaining_durations, shannon_rate, state, time_weight, time_weight_value)


def test_max_los_values():
    assert max_los_distance(0, 0) == 0
    assert max_los_distance(1414, 1400) == pytest.approx(8923.6, abs=0.05)
    assert max_los_distance(1414, 1400) == max_los_distance(1400, 1414)
    with pytest.raises(ValueError):
        max_los_distance(-1, 100)


def test_visibility_and_comotion_boundaries():
    assert is_visible(5000.0, 5000.0)
    assert not is_visible(5000.1, 5000.0)
    assert not is_comoving(0.5, -0.5)
    assert not is_comoving(0.0, 0.5)
    assert is_comoving(-0.1, -0.2)


def _eph(spec, ecef, dlat=None, index=0):
    ecef = np.asarray(ecef, dtype=float)
    n, t = ecef.shape[:2]
    r = np.linalg.norm(ecef, axis=-1)
    lat = np.degrees(np.arcsin(ecef[..., 2] / r))
    lon = np.degrees(np.arctan2(ecef[..., 1], ecef[..., 0]))
    layer = build_constellation(spec, index)
    dlat = np.full((n, t), 0.1) if dlat is None else np.asarray(dlat, dtype=float)
    return Ephemeris(layer, TimeGrid(n_slots=t), lat, lon, r - R_EARTH_KM, ecef, ecef, dlat)


def test_inter_distance_trivial_cases(presets):
    eph = propagate(build_constellation(presets["globalstar"]), TimeGrid(n_slots=2))
    u = state(eph, 0, 0)
    assert inter_distance(u, u) == 0
    # slot 0 satellite (0,0) and the one half a plane around: antipodal
    v = state(eph, 3, 0)
    assert inter_distance(u, v) == pytest.approx(2 * (R_EARTH_KM + 1414))
    with pytest.raises(ValueError):
        inter_distance(u, state(eph, 0, 1))


def _great_circle_chord(lat1, lon1, r1, lat2, lon2, r2):
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    cos_g = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return math.sqrt(r1 * r1 + r2 * r2 - 2 * r1 * r2 * cos_g)


def test_distance_matches_independent_geometry(presets):
    grid = TimeGrid(n_slots=3)
    ga = propagate(build_constellation(presets["globalstar"], 0), grid)
    gc = propagate(build_constellation(presets["celestri"], 1), grid)
    r1, r2 = R_EARTH_KM + 1414, R_EARTH_KM + 1400
    # both (0,0) sit on the shared ascending node at epoch
    d00 = inter_distance(state(ga, 0, 0), state(gc, 0, 0))
    assert d00 == pytest.approx(14.0, abs=1e-6)
    for a, b in ((1, 2), (2, 5), (4, 8)):
        u, v = 360 * a / 6, 360 * b / 9
        d = inter_distance(state(ga, a, 0), state(gc, b, 0))
        assert d == pytest.approx(node_aligned_distance(r1, r2, u, v, 52, 48), abs=1e-6)
    rng = np.random.default_rng(3)
    for _ in range(20):
        a, b, t = int(rng.integers(48)), int(rng.integers(63)), int(rng.integers(3))
        want = _great_circle_chord(ga.lat_deg[a, t], ga.lon_deg[a, t], r1, gc.lat_deg[b, t], gc.lon_deg[b, t], r2)
        assert inter_distance(state(ga, a, t), state(gc, b, t)) == pytest.approx(want, rel=1e-9)


def test_shannon_inversion_exact():
    assert shannon_rate(20e6, 2.0 ** 50 - 1) == pytest.approx(1e9, rel=1e-15)
    zero = RateParams(tx_power_w=0.0)
    assert link_rate(zero, 1000.0) == 0.0
    with pytest.raises(ValueError):
        link_rate(RateParams(), 0.0)


def test_calibration_hits_target():
    p = calibrate_rate_params(4000.0, 1e9, RateParams())
    assert link_rate(p, 4000.0) == pytest.approx(1e9, rel=1e-12)
    assert link_rate(p, 3000.0) > 1e9 > link_rate(p, 5000.0)
    assert p.bandwidth_hz == 20e6 and p.tx_power_w == 3.74


@settings(max_examples=50, deadline=None)
@given(d1=st.floats(1, 2e4), d2=st.floats(1, 2e4))
def test_rate_strictly_decreasing(d1, d2):
    p = calibrate_rate_params(3000.0)
    if d1 < d2:
        assert link_rate(p, d1) > link_rate(p, d2)


def test_remaining_durations_hand_count():
    f = np.array([0, 1, 1, 1, 0, 1], dtype=bool)
    total, resid = remaining_durations(f, 60.0)
    assert total.tolist() == [0, 240, 180, 120, 0, 60]
    assert resid.tolist() == [0, 180, 120, 60, 0, 60]


def test_time_weight_values():
    assert time_weight_value(10, 10, 5, 5) == 1.0
    assert time_weight_value(5, 10, 2.5, 5) == 0.25


def test_constructed_three_slot_window():
    spec = WalkerSpec(1, 1, 1000, 50, 0)
    r = R_EARTH_KM + 1000
    a = _eph(spec, [[[r, 0, 0]] * 3])
    far = [-r, 0, 0]
    near = [r, 100.0, 0]
    b = _eph(WalkerSpec(2, 1, 1000, 50, 0), [[near, near, near], [far, near, far]], index=1)
    cs = build_candidate_set(a, b, eta1=0.0, eta2=1.0)
    assert cs.physical[0, :, :].tolist() == [[True, True, True], [False, True, False]]
    # slot 1: pair 0 has 2 slots total and residual, pair 1 has 1 and 1
    assert cs.weight[0, 0, 1] == pytest.approx(1.0)
    assert cs.weight[0, 1, 1] == pytest.approx(0.25)
    assert cs.weight[0, 0, 0] == pytest.approx(1.0)
    cand = {c.endpoint_b.plane: c for c in cs.pairs()}
    assert time_weight(cand[1], 1) == pytest.approx(0.25)
    with pytest.raises(KeyError):
        time_weight(cand[1], 0)
    filtered = build_candidate_set(a, b, eta1=0.1, eta2=0.9)
    assert filtered.admitted[0, :, 1].tolist() == [False, True]
    assert not build_candidate_set(a, b, eta1=1.0 + 1e-9, eta2=2.0).admitted.any()


def test_single_colocated_pair_weight_one():
    spec = WalkerSpec(1, 1, 1000, 50, 0)
    r = R_EARTH_KM + 1000
    a = _eph(spec, [[[r, 0, 0]] * 4])
    b = _eph(spec, [[[r, 0, 1.0]] * 4], index=1)
    cs = build_candidate_set(a, b, 0.0, 1.0)
    assert cs.weight[0, 0, 0] == 1.0 and cs.admitted[0, 0].all()


def test_candidate_errors(presets):
    eph = propagate(build_constellation(presets["toy-4x4"], 0), TimeGrid(n_slots=3))
    with pytest.raises(ValueError):
        build_candidate_set(eph, eph)
    other = propagate(build_constellation(presets["toy-3x5"], 1), TimeGrid(n_slots=4))
    with pytest.raises(ValueError):
        build_candidate_set(eph, other)


def test_brute_force_filter_globalstar_celestri(gc_pair):
    cs = gc_pair.candidates
    ea, eb = cs.eph_a, cs.eph_b
    d_max = math.sqrt(1414 * (1414 + 2 * R_EARTH_KM)) + math.sqrt(1400 * (1400 + 2 * R_EARTH_KM))
    count = 0
    for a in range(48):
        for b in range(63):
            pa, pb = ea.ecef_km[a, 0], eb.ecef_km[b, 0]
            d = math.sqrt(sum((x - y) ** 2 for x, y in zip(pa, pb)))
            moving = (ea.lat_deg[a, 1] - ea.lat_deg[a, 0]) * (eb.lat_deg[b, 1] - eb.lat_deg[b, 0]) > 0
            ok = d <= d_max and moving
            count += ok
            assert ok == cs.physical[a, b, 0]
    assert count == int(cs.physical[:, :, 0].sum())
    assert count > 0


def test_filter_soundness_and_weight_bounds(gc_pair):
    cs = gc_pair.candidates
    assert ((cs.weight >= 0) & (cs.weight <= 1)).all()
    adm = cs.admitted
    assert (cs.weight[adm] >= cs.eta1).all() and (cs.weight[adm] <= cs.eta2).all()
    assert (cs.physical | ~adm).all()
    assert (cs.residual_s <= cs.total_remaining_s).all()
    t = 5
    sc = cs.at(t)
    assert len(sc) == int(adm[:, :, t].sum())
    assert cs.contains(int(sc.a[0]), int(sc.b[0]), t)


def test_candidate_csv(tmp_path, toy_pair):
    path = tmp_path / "c.csv"
    toy_pair.candidates.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "layer_a,plane_a,slot_a,layer_b,plane_b,slot_b,slot_index,distance_km,weight"
    assert len(lines) - 1 == int(toy_pair.candidates.admitted.sum())


def test_grazing_option_is_stricter(presets):
    grid = TimeGrid(n_slots=4)
    ea = propagate(build_constellation(presets["globalstar"], 0), grid)
    eb = propagate(build_constellation(presets["celestri"], 1), grid)
    loose = build_candidate_set(ea, eb)
    strict = build_candidate_set(ea, eb, grazing_km=80.0)
    assert (loose.physical | ~strict.physical).all()
    assert strict.physical.sum() < loose.physical.sum()
