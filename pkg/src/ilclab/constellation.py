"""Walker-Delta layers and ideal circular-orbit propagation.

Positions are computed for a spherical Earth with no perturbations.  Each
satellite keeps a fixed RAAN and advances its argument of latitude by the
mean motion; the inertial position is then rotated into an Earth-fixed
frame to obtain latitude/longitude.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from importlib import resources

import numpy as np

R_EARTH_KM = 6371.0
MU_KM3_S2 = 398600.4418
OMEGA_EARTH_RAD_S = 7.2921150e-5

PHASINGS = ("delta", "slot")


class ValidationError(ValueError):
    """Raised when a spec or config field is out of its allowed range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class WalkerSpec:
    planes: int
    sats_per_plane: int
    altitude_km: float
    inclination_deg: float
    phase_factor: int = 1
    name: str = ""

    def __post_init__(self):
        if int(self.planes) != self.planes or self.planes < 1:
            raise ValidationError("planes", f"must be a positive integer, got {self.planes!r}")
        if int(self.sats_per_plane) != self.sats_per_plane or self.sats_per_plane < 1:
            raise ValidationError(
                "sats_per_plane", f"must be a positive integer, got {self.sats_per_plane!r}"
            )
        if int(self.phase_factor) != self.phase_factor or not (
            0 <= self.phase_factor <= self.sats_per_plane - 1
        ):
            raise ValidationError(
                "phase_factor",
                f"must satisfy 0 <= F <= S-1 = {self.sats_per_plane - 1}, got {self.phase_factor!r}",
            )
        if not self.altitude_km > 0:
            raise ValidationError("altitude_km", f"must be > 0, got {self.altitude_km!r}")
        if not (0 < self.inclination_deg <= 180):
            raise ValidationError(
                "inclination_deg", f"must be in (0, 180], got {self.inclination_deg!r}"
            )

    @property
    def n_sats(self) -> int:
        return self.planes * self.sats_per_plane

    @property
    def semi_major_axis_km(self) -> float:
        return R_EARTH_KM + self.altitude_km

    @property
    def period_s(self) -> float:
        return orbital_period(self.altitude_km)

    def label(self) -> str:
        """Walker notation N/P/F:H:i."""
        return (
            f"{self.n_sats}/{self.planes}/{self.phase_factor}:"
            f"{self.altitude_km:g}:{self.inclination_deg:g}"
        )

    @classmethod
    def parse(cls, text: str, name: str = "") -> "WalkerSpec":
        """Parse ``N/P/F:H:i`` (e.g. ``48/8/1:1414:52``)."""
        try:
            head, alt, inc = text.split(":")
            n, p, f = (int(v) for v in head.split("/"))
        except ValueError as exc:
            raise ValidationError("spec", f"expected N/P/F:H:i, got {text!r}") from exc
        if n % p:
            raise ValidationError("spec", f"N={n} is not a multiple of P={p}")
        return cls(p, n // p, float(alt), float(inc), f, name or text)


@dataclass(frozen=True)
class SatelliteId:
    layer: int
    plane: int
    slot: int

    def flat(self, sats_per_plane: int) -> int:
        return self.plane * sats_per_plane + self.slot

    @classmethod
    def from_flat(cls, layer: int, index: int, sats_per_plane: int) -> "SatelliteId":
        return cls(layer, index // sats_per_plane, index % sats_per_plane)


@dataclass(frozen=True)
class TimeGrid:
    epoch: datetime = datetime(2022, 8, 1, 10, 0, 0, tzinfo=timezone.utc)
    slot_seconds: float = 60.0
    n_slots: int = 120

    def __post_init__(self):
        if not self.slot_seconds > 0:
            raise ValidationError("slot_seconds", f"must be > 0, got {self.slot_seconds!r}")
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise ValidationError("n_slots", f"must be an integer >= 1, got {self.n_slots!r}")

    @property
    def seconds(self) -> np.ndarray:
        return np.arange(self.n_slots) * self.slot_seconds

    def time_of(self, slot: int) -> datetime:
        return self.epoch + timedelta(seconds=slot * self.slot_seconds)


@dataclass(frozen=True)
class Layer:
    """A built layer: Walker parameters plus per-satellite orbital elements."""

    index: int
    spec: WalkerSpec
    raan_deg: np.ndarray  # (N,)
    anomaly_deg: np.ndarray  # (N,) argument of latitude at epoch

    @property
    def n_sats(self) -> int:
        return self.spec.n_sats

    def satellites(self) -> list[SatelliteId]:
        S = self.spec.sats_per_plane
        return [SatelliteId.from_flat(self.index, i, S) for i in range(self.n_sats)]

    def plane_of(self, flat: np.ndarray | int):
        return np.asarray(flat) // self.spec.sats_per_plane


def orbital_period(altitude_km: float) -> float:
    a = R_EARTH_KM + altitude_km
    return 2.0 * math.pi * math.sqrt(a**3 / MU_KM3_S2)


def build_constellation(spec: WalkerSpec, layer_index: int = 0, phasing: str = "delta") -> Layer:
    """Place ``spec.n_sats`` satellites on ``spec.planes`` evenly spaced planes.

    ``phasing="delta"`` shifts each plane by ``360*F/N`` degrees (standard
    Walker delta); ``"slot"`` shifts by ``F`` whole in-plane slots.
    """
    if phasing not in PHASINGS:
        raise ValidationError("phasing", f"must be one of {PHASINGS}, got {phasing!r}")
    P, S, F = spec.planes, spec.sats_per_plane, spec.phase_factor
    p = np.repeat(np.arange(P), S)
    s = np.tile(np.arange(S), P)
    raan = 360.0 * p / P
    step = F / spec.n_sats if phasing == "delta" else F / S
    anomaly = np.mod(360.0 * s / S + 360.0 * step * p, 360.0)
    return Layer(layer_index, spec, raan.astype(float), anomaly.astype(float))


def gmst_rad(when: datetime) -> float:
    """Greenwich mean sidereal angle (IAU-82 linear term only)."""
    if when.tzinfo is None:
        when = when.replace(tzinfo=timezone.utc)
    j2000 = datetime(2000, 1, 1, 12, 0, 0, tzinfo=timezone.utc)
    days = (when - j2000).total_seconds() / 86400.0
    deg = 280.46061837 + 360.98564736629 * days
    return math.radians(deg % 360.0)


@dataclass(frozen=True)
class Ephemeris:
    """Per-satellite, per-slot positions for one layer.

    Arrays are indexed ``[sat, slot]``; Cartesian arrays carry a trailing
    axis of length 3 (km).  ``dlat_deg[:, t]`` is the latitude change from
    slot ``t`` to ``t+1`` (the last slot uses one extra propagated step).
    """

    layer: Layer
    grid: TimeGrid
    lat_deg: np.ndarray
    lon_deg: np.ndarray
    alt_km: np.ndarray
    ecef_km: np.ndarray
    eci_km: np.ndarray
    dlat_deg: np.ndarray

    @property
    def n_sats(self) -> int:
        return self.lat_deg.shape[0]

    @property
    def n_slots(self) -> int:
        return self.lat_deg.shape[1]


def _positions(layer: Layer, t_s: np.ndarray, theta0: float, omega: float):
    spec = layer.spec
    a = spec.semi_major_axis_km
    n = math.sqrt(MU_KM3_S2 / a**3)
    inc = math.radians(spec.inclination_deg)
    raan = np.radians(layer.raan_deg)[:, None]
    u = np.radians(layer.anomaly_deg)[:, None] + n * t_s[None, :]
    cu, su = np.cos(u), np.sin(u)
    cO, sO = np.cos(raan), np.sin(raan)
    ci, si = math.cos(inc), math.sin(inc)
    eci = np.stack(
        [a * (cO * cu - sO * su * ci), a * (sO * cu + cO * su * ci), a * (su * si) * np.ones_like(cO)],
        axis=-1,
    )
    theta = theta0 + omega * t_s
    ct, st = np.cos(theta)[None, :], np.sin(theta)[None, :]
    ecef = np.stack(
        [ct * eci[..., 0] + st * eci[..., 1], -st * eci[..., 0] + ct * eci[..., 1], eci[..., 2]],
        axis=-1,
    )
    return eci, ecef


def propagate(layer: Layer, grid: TimeGrid, earth_rotation: bool = True) -> Ephemeris:
    t_s = np.arange(grid.n_slots + 1) * grid.slot_seconds
    if earth_rotation:
        eci, ecef = _positions(layer, t_s, gmst_rad(grid.epoch), OMEGA_EARTH_RAD_S)
    else:
        eci, ecef = _positions(layer, t_s, 0.0, 0.0)
    r = np.linalg.norm(ecef, axis=-1)
    lat = np.degrees(np.arcsin(np.clip(ecef[..., 2] / r, -1.0, 1.0)))
    lon = np.degrees(np.arctan2(ecef[..., 1], ecef[..., 0]))
    n = grid.n_slots
    return Ephemeris(
        layer=layer,
        grid=grid,
        lat_deg=lat[:, :n],
        lon_deg=lon[:, :n],
        alt_km=r[:, :n] - R_EARTH_KM,
        ecef_km=ecef[:, :n],
        eci_km=eci[:, :n],
        dlat_deg=np.diff(lat, axis=1),
    )


def latitude_delta(eph: Ephemeris, sat: SatelliteId | int, t: int) -> float:
    """Latitude change between slots ``t`` and ``t+1``; positive means ascending."""
    if not 0 <= t < eph.n_slots - 1:
        raise IndexError(f"slot {t} has no successor in a {eph.n_slots}-slot grid")
    i = sat.flat(eph.layer.spec.sats_per_plane) if isinstance(sat, SatelliteId) else int(sat)
    return float(eph.lat_deg[i, t + 1] - eph.lat_deg[i, t])


def load_presets() -> dict[str, WalkerSpec]:
    """Reference constellations plus reduced desk-scale variants, keyed by name."""
    raw = json.loads(resources.files("ilclab.data").joinpath("presets.json").read_text())
    out = {}
    for row in raw["layers"]:
        out[row["name"]] = WalkerSpec(
            planes=row["planes"],
            sats_per_plane=row["sats_per_plane"],
            altitude_km=row["altitude_km"],
            inclination_deg=row["inclination_deg"],
            phase_factor=row.get("phase_factor", 1),
            name=row["name"],
        )
    return out


def preset_pairs() -> dict[str, tuple[str, ...]]:
    raw = json.loads(resources.files("ilclab.data").joinpath("presets.json").read_text())
    return {k: tuple(v) for k, v in raw["pairs"].items()}


def resolve_layer(text: str) -> WalkerSpec:
    """Preset name or inline ``N/P/F:H:i`` spec."""
    presets = load_presets()
    if text in presets:
        return presets[text]
    return WalkerSpec.parse(text)
