"""City-to-city demand over the layered network.

Cities attach to the nearest satellite they can see above a minimum
elevation, flows follow BFS shortest paths, and per-slot hop statistics are
collected.  Traffic is an evaluation input only; no strategy optimises for it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .constellation import R_EARTH_KM, Ephemeris
from .evaluation import Demand, route_paths
from .topology import SupraAdjacency

CITY_FIELDS = ("name", "lat_deg", "lon_deg", "population")
DEFAULT_VOLUME_BPS = 10e6


class CityFormatError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class City:
    name: str
    lat_deg: float
    lon_deg: float
    population: float

    def __post_init__(self):
        if not abs(self.lat_deg) <= 90:
            raise ValueError(f"{self.name}: latitude {self.lat_deg} outside [-90, 90]")
        if not abs(self.lon_deg) <= 180:
            raise ValueError(f"{self.name}: longitude {self.lon_deg} outside [-180, 180]")
        if not self.population > 0:
            raise ValueError(f"{self.name}: population must be > 0")

    def ecef_km(self) -> np.ndarray:
        lat, lon = math.radians(self.lat_deg), math.radians(self.lon_deg)
        return R_EARTH_KM * np.array([math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)])


@dataclass(frozen=True)
class FlowDemand:
    origin: int  # index into the city list
    destination: int
    volume_bps: float = DEFAULT_VOLUME_BPS

    def __post_init__(self):
        if self.origin == self.destination:
            raise ValueError("a flow needs two different cities")


def sample_cities_path() -> Path:
    return Path(str(resources.files("ilclab.data").joinpath("cities100.csv")))


def load_cities(path: str | Path) -> list[City]:
    """Read ``name,lat_deg,lon_deg,population`` rows; names must be unique."""
    text = Path(path).read_text()
    if not text.strip():
        return []
    rows = csv.reader(text.splitlines())
    header = next(rows)
    if tuple(h.strip() for h in header) != CITY_FIELDS:
        raise CityFormatError(1, f"expected header {','.join(CITY_FIELDS)}, got {','.join(header)}")
    cities, seen = [], set()
    for line, row in enumerate(rows, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 4:
            raise CityFormatError(line, f"expected 4 fields, got {len(row)}")
        name = row[0].strip()
        try:
            city = City(name, float(row[1]), float(row[2]), float(row[3]))
        except ValueError as exc:
            raise CityFormatError(line, str(exc)) from None
        if name in seen:
            raise CityFormatError(line, f"duplicate city {name!r}")
        seen.add(name)
        cities.append(city)
    return cities


def generate_flows(cities: Sequence[City], n_pairs: int, seed: int,
                   volume_bps: float = DEFAULT_VOLUME_BPS, unique_pairs: bool = True) -> list[FlowDemand]:
    """Origin drawn by population, destination by population among the others.

    With ``unique_pairs`` no ordered pair repeats: the draw is a weighted
    sample without replacement from all ordered pairs, using the same
    two-step probability.
    """
    n = len(cities)
    if n < 2:
        raise ValueError("need at least two cities")
    if n_pairs < 0:
        raise ValueError("n_pairs must be >= 0")
    if unique_pairs and n_pairs > n * (n - 1):
        raise ValueError(f"{n_pairs} flows requested but only {n * (n - 1)} ordered city pairs exist")
    rng = np.random.default_rng(seed)
    p = np.array([c.population for c in cities], dtype=float)
    p /= p.sum()
    w = p[:, None] * p[None, :] / (1.0 - p)[:, None]
    np.fill_diagonal(w, 0.0)
    flat = w.ravel() / w.sum()
    picks = rng.choice(n * n, size=n_pairs, replace=not unique_pairs, p=flat)
    return [FlowDemand(int(i // n), int(i % n), volume_bps) for i in picks]


def elevation_deg(ground_km: np.ndarray, sat_km: np.ndarray) -> np.ndarray:
    """Elevation of satellites ``(m, 3)`` seen from ground points ``(c, 3)``; shape ``(c, m)``."""
    up = ground_km / np.linalg.norm(ground_km, axis=-1, keepdims=True)
    los = sat_km[None, :, :] - ground_km[:, None, :]
    rng_ = np.linalg.norm(los, axis=-1)
    sin_el = np.einsum("cmk,ck->cm", los, up) / rng_
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def attach(cities: Sequence[City], ephemerides: Sequence[Ephemeris], offsets: Sequence[int], slot: int,
           access_layers: Sequence[int] = (0,), min_elevation_deg: float = 10.0) -> np.ndarray:
    """Supra node of the nearest visible access satellite per city (-1 if none)."""
    ground = np.array([c.ecef_km() for c in cities]).reshape(-1, 3)
    sats, nodes = [], []
    for layer in access_layers:
        eph = ephemerides[layer]
        sats.append(eph.ecef_km[:, slot])
        nodes.append(offsets[layer] + np.arange(eph.n_sats))
    pos = np.concatenate(sats)
    node = np.concatenate(nodes)
    el = elevation_deg(ground, pos)
    dist = np.linalg.norm(pos[None] - ground[:, None], axis=-1)
    dist = np.where(el >= min_elevation_deg, dist, np.inf)
    best = np.argmin(dist, axis=1)
    ok = np.isfinite(dist[np.arange(len(ground)), best])
    return np.where(ok, node[best], -1)


@dataclass
class SlotTraffic:
    slot: int
    hops: list[int | None]  # None marks an unserved flow
    loads_bps: np.ndarray  # per supra edge
    served: int

    @property
    def mean_hops(self) -> float:
        h = [x for x in self.hops if x is not None]
        return float(np.mean(h)) if h else math.nan

    @property
    def total_throughput_bps(self) -> float:
        return float(self.loads_bps.sum())


def attach_and_route(flows: Sequence[FlowDemand], cities: Sequence[City], ephemerides: Sequence[Ephemeris],
                     supra: SupraAdjacency, slot: int, access_layers: Sequence[int] = (0,),
                     min_elevation_deg: float = 10.0) -> SlotTraffic:
    """Route every flow whose cities both see a satellite; sum volume per link.

    ``total_throughput_bps`` is the carried link load, i.e. volume times hops
    summed over served flows.
    """
    node = attach(cities, ephemerides, supra.offsets, slot, access_layers, min_elevation_deg)
    idx, demands = [], []
    for i, f in enumerate(flows):
        s, t = node[f.origin], node[f.destination]
        if s >= 0 and t >= 0:
            idx.append(i)
            demands.append(Demand(int(s), int(t), f.volume_bps))
    hops: list[int | None] = [None] * len(flows)
    loads = np.zeros(len(supra.edges))
    for i, d, path in zip(idx, demands, route_paths(supra, demands)):
        if path is None:
            continue
        hops[i] = len(path)
        np.add.at(loads, path, d.volume)
    served = sum(h is not None for h in hops)
    return SlotTraffic(slot, hops, loads, served)


@dataclass
class HopSeries:
    slots: np.ndarray
    mean_hops: np.ndarray
    served: np.ndarray
    total_throughput_bps: np.ndarray

    @property
    def std(self) -> float:
        return float(np.nanstd(self.mean_hops))

    def rows(self):
        for t, h, s, tp in zip(self.slots, self.mean_hops, self.served, self.total_throughput_bps):
            yield int(t), float(h), int(s), float(tp)


def hop_series(flows, cities, ephemerides, supras: Sequence[SupraAdjacency], slots: Sequence[int],
               access_layers=(0,), min_elevation_deg: float = 10.0) -> HopSeries:
    per = [attach_and_route(flows, cities, ephemerides, s, t, access_layers, min_elevation_deg)
           for s, t in zip(supras, slots)]
    return HopSeries(np.asarray(slots), np.array([p.mean_hops for p in per]),
                     np.array([p.served for p in per]), np.array([p.total_throughput_bps for p in per]))
