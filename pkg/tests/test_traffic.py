import hashlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from ilclab.assignment import IlcAssignment
from ilclab.constellation import TimeGrid
from ilclab.optimizer import greedy_shortest
from ilclab.traffic import (City, CityFormatError, FlowDemand, attach, attach_and_route, elevation_deg,
                            generate_flows, hop_series, load_cities, sample_cities_path)

CITIES_SHA256 = "c892748c1fb76eeb45ee028ee3fe58c6f0f1f35dee9896d38e64a3649199aeb3"


def test_fixture_audit():
    path = sample_cities_path()
    assert hashlib.sha256(path.read_bytes()).hexdigest() == CITIES_SHA256
    cities = load_cities(path)
    assert len(cities) == 100
    assert len({c.name for c in cities}) == 100


def test_load_errors(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    assert load_cities(empty) == []
    bad = tmp_path / "b.csv"
    bad.write_text("name,lat_deg,lon_deg,population\nA,10,10,5\nB,91,0,3\n")
    with pytest.raises(CityFormatError) as exc:
        load_cities(bad)
    assert exc.value.line == 3
    dup = tmp_path / "d.csv"
    dup.write_text("name,lat_deg,lon_deg,population\nA,10,10,5\nA,11,0,3\n")
    with pytest.raises(CityFormatError, match="duplicate"):
        load_cities(dup)
    hdr = tmp_path / "h.csv"
    hdr.write_text("city,lat,lon,pop\n")
    with pytest.raises(CityFormatError) as exc:
        load_cities(hdr)
    assert exc.value.line == 1
    short = tmp_path / "s.csv"
    short.write_text("name,lat_deg,lon_deg,population\nA,10,10\n")
    with pytest.raises(CityFormatError, match="4 fields"):
        load_cities(short)


def test_city_and_flow_validation():
    with pytest.raises(ValueError):
        City("x", 0, 181, 1)
    with pytest.raises(ValueError):
        City("x", 0, 0, 0)
    with pytest.raises(ValueError):
        FlowDemand(1, 1)


def three():
    return [City("a", 0, 0, 1), City("b", 10, 10, 2), City("c", 20, 20, 7)]


def test_generate_flows_basics():
    two = [City("a", 0, 0, 1), City("b", 1, 1, 1)]
    (f,) = generate_flows(two, 1, 0)
    assert {f.origin, f.destination} == {0, 1}
    assert generate_flows(three(), 5, 3) == generate_flows(three(), 5, 3)
    assert len({(f.origin, f.destination) for f in generate_flows(three(), 6, 1)}) == 6
    with pytest.raises(ValueError):
        generate_flows(three(), 7, 0)
    with pytest.raises(ValueError):
        generate_flows(three()[:1], 1, 0)
    assert all(f.volume_bps == 10e6 for f in generate_flows(three(), 3, 0))


def test_population_weighting_chi2():
    flows = generate_flows(three(), 10_000, 42, unique_pairs=False)
    p = np.array([0.1, 0.2, 0.7])
    orig = np.bincount([f.origin for f in flows], minlength=3)
    assert stats.chisquare(orig, p * 10_000).pvalue > 0.05
    # destination: population among the remaining cities
    dest_p = np.array([sum(p[i] * p[j] / (1 - p[i]) for i in range(3) if i != j) for j in range(3)])
    dest = np.bincount([f.destination for f in flows], minlength=3)
    assert stats.chisquare(dest, dest_p * 10_000).pvalue > 0.05


def test_elevation_overhead_and_horizon():
    ground = np.array([[6371.0, 0, 0]])
    sats = np.array([[7000.0, 0, 0], [0, 7000.0, 0]])
    el = elevation_deg(ground, sats)
    assert el[0, 0] == pytest.approx(90.0)
    assert el[0, 1] < 0


@pytest.fixture(scope="module")
def toy_traffic(toy_pair):
    cities = load_cities(sample_cities_path())
    flows = generate_flows(cities, 200, 0)
    ephs = [toy_pair.candidates.eph_a, toy_pair.candidates.eph_b]
    return cities, flows, ephs


def test_attach_respects_elevation(toy_pair, toy_traffic):
    cities, _, ephs = toy_traffic
    offs = toy_pair.supra([]).offsets
    node = attach(cities, ephs, offs, 0, (0, 1), 10.0)
    ground = np.array([c.ecef_km() for c in cities])
    pos = np.concatenate([ephs[0].ecef_km[:, 0], ephs[1].ecef_km[:, 0]])
    for i, n in enumerate(node):
        if n >= 0:
            assert elevation_deg(ground[i:i + 1], pos[n:n + 1])[0, 0] >= 10.0
    assert (attach(cities, ephs, offs, 0, (0,), 89.999) == -1).sum() > 90


def test_same_satellite_zero_hops(toy_pair):
    cs = [City("x", 0.0, 0.0, 1), City("y", 0.01, 0.01, 1)]
    ephs = [toy_pair.candidates.eph_a, toy_pair.candidates.eph_b]
    s = toy_pair.supra([])
    node = attach(cs, ephs, s.offsets, 0, (0, 1), -90.0)
    assert node[0] == node[1]
    r = attach_and_route([FlowDemand(0, 1)], cs, ephs, s, 0, (0, 1), -90.0)
    assert r.hops == [0] and r.loads_bps.sum() == 0


def test_identical_flows_load_linearly(toy_pair, toy_traffic):
    cities, flows, ephs = toy_traffic
    s = toy_pair.supra(greedy_shortest(toy_pair.candidates, 3, 0).pairs)
    f = next(f for f in flows if attach_and_route([f], cities, ephs, s, 0, (0, 1), 0.0).hops[0])
    one = attach_and_route([f], cities, ephs, s, 0, (0, 1), 0.0)
    five = attach_and_route([f] * 5, cities, ephs, s, 0, (0, 1), 0.0)
    np.testing.assert_allclose(five.loads_bps, 5 * one.loads_bps)


def test_load_conservation_and_monotone_hops(toy_pair, toy_traffic):
    cities, flows, ephs = toy_traffic
    base = toy_pair.supra([])
    linked = toy_pair.supra(greedy_shortest(toy_pair.candidates, 4, 0).pairs)
    r0 = attach_and_route(flows, cities, ephs, base, 0, (0, 1), 0.0)
    r1 = attach_and_route(flows, cities, ephs, linked, 0, (0, 1), 0.0)
    for r in (r0, r1):
        want = sum(f.volume_bps * h for f, h in zip(flows, r.hops) if h is not None)
        assert r.loads_bps.sum() == pytest.approx(want)
        assert r.total_throughput_bps == pytest.approx(want)
    for h0, h1 in zip(r0.hops, r1.hops):
        if h0 is not None:
            assert h1 is not None and h1 <= h0
    assert r1.served >= r0.served


def test_hop_series_shape(toy_pair, toy_traffic):
    cities, flows, ephs = toy_traffic
    supras = [toy_pair.supra([]) for _ in range(3)]
    hs = hop_series(flows, cities, ephs, supras, range(3), (0, 1), 0.0)
    assert hs.mean_hops.shape == (3,)
    rows = list(hs.rows())
    assert rows[0][0] == 0 and len(rows) == 3
    assert hs.std == pytest.approx(np.nanstd(hs.mean_hops))


def test_attachment_deterministic(toy_pair, toy_traffic):
    cities, _, ephs = toy_traffic
    offs = toy_pair.supra([]).offsets
    a1 = attach(cities, ephs, offs, 3, (0, 1))
    a2 = attach(cities, ephs, offs, 3, (0, 1))
    assert (a1 == a2).all()
