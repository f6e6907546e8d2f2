"""Inter-satellite geometry, visibility, Shannon rates and candidate ILC sets."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .constellation import R_EARTH_KM, Ephemeris, SatelliteId, ValidationError

BOLTZMANN = 1.381e-23
NOISE_TEMP_K = 354.18
SPEED_OF_LIGHT = 299_792_458.0


def max_los_distance(h_i: float, h_j: float, r_e: float = R_EARTH_KM) -> float:
    """Largest separation at which two satellites at altitudes ``h_i``, ``h_j`` see each other."""
    if h_i < 0 or h_j < 0:
        raise ValueError(f"altitudes must be non-negative, got {h_i}, {h_j}")
    return math.sqrt(h_i * (h_i + 2 * r_e)) + math.sqrt(h_j * (h_j + 2 * r_e))


@dataclass(frozen=True)
class SatState:
    position_km: np.ndarray
    slot: int
    dlat_deg: float = 0.0


def state(eph: Ephemeris, sat: SatelliteId | int, t: int) -> SatState:
    i = sat.flat(eph.layer.spec.sats_per_plane) if isinstance(sat, SatelliteId) else int(sat)
    return SatState(eph.ecef_km[i, t].copy(), t, float(eph.dlat_deg[i, t]))


def inter_distance(u: SatState, v: SatState) -> float:
    if u.slot != v.slot:
        raise ValueError(f"states from different slots ({u.slot} vs {v.slot})")
    return float(np.linalg.norm(np.asarray(u.position_km) - np.asarray(v.position_km)))


def node_aligned_distance(r_i: float, r_j: float, u_deg: float, v_deg: float, inc_i: float, inc_j: float) -> float:
    """Separation of two satellites whose planes share the ascending node.

    ``u_deg``/``v_deg`` are arguments of latitude.  Only valid when both
    planes have the same RAAN; used as a cross-check of the Cartesian chord.
    """
    u, v = math.radians(u_deg), math.radians(v_deg)
    c = math.cos(u) * math.cos(v) + math.cos(math.radians(inc_i - inc_j)) * math.sin(u) * math.sin(v)
    return math.sqrt(max(r_i**2 + r_j**2 - 2 * r_i * r_j * c, 0.0))


def is_visible(d_uv: float, d_max: float) -> bool:
    return d_uv <= d_max


def is_comoving(dlat_u: float, dlat_v: float) -> bool:
    return dlat_u * dlat_v > 0


def pairwise_distances(eph_i: Ephemeris, eph_j: Ephemeris, t: int | slice = slice(None)) -> np.ndarray:
    """Chord distances ``[a, b(, slot)]`` between every satellite of two layers."""
    xi = eph_i.ecef_km[:, t]
    xj = eph_j.ecef_km[:, t]
    return np.linalg.norm(xi[:, None] - xj[None, :], axis=-1)


def segment_clears_earth(p: np.ndarray, q: np.ndarray, min_radius_km: float) -> np.ndarray:
    """True where the segment p-q stays above ``min_radius_km`` from Earth's centre."""
    d = q - p
    dd = np.sum(d * d, axis=-1)
    s = np.clip(-np.sum(p * d, axis=-1) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    closest = p + s[..., None] * d
    return np.linalg.norm(closest, axis=-1) >= min_radius_km


# --- rates -----------------------------------------------------------------


@dataclass(frozen=True)
class RateParams:
    bandwidth_hz: float = 20e6
    tx_power_w: float = 3.74
    antenna_gain: float = 1.0
    carrier_hz: float = 26e9
    boltzmann: float = BOLTZMANN
    noise_temp_k: float = NOISE_TEMP_K

    def __post_init__(self):
        for name in ("bandwidth_hz", "antenna_gain", "carrier_hz", "boltzmann", "noise_temp_k"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, f"must be > 0, got {getattr(self, name)!r}")
        if self.tx_power_w < 0:
            raise ValidationError("tx_power_w", f"must be >= 0, got {self.tx_power_w!r}")


def free_space_loss(d_km, carrier_hz: float):
    return (4 * math.pi * np.asarray(d_km) * 1e3 * carrier_hz / SPEED_OF_LIGHT) ** 2


def snr(params: RateParams, d_km):
    noise = params.boltzmann * params.noise_temp_k * params.bandwidth_hz
    return params.tx_power_w * params.antenna_gain**2 / (noise * free_space_loss(d_km, params.carrier_hz))


def shannon_rate(bandwidth_hz: float, snr_value):
    return bandwidth_hz * np.log2(1.0 + np.asarray(snr_value, dtype=float))


def link_rate(params: RateParams, d_km):
    """Shannon rate in bit/s over a free-space link of length ``d_km``."""
    d = np.asarray(d_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("link distance must be > 0")
    out = shannon_rate(params.bandwidth_hz, snr(params, d))
    return float(out) if out.ndim == 0 else out


def calibrate_rate_params(
    reference_km: float, target_bps: float = 1e9, base: RateParams | None = None
) -> RateParams:
    """Choose the antenna gain so a link of ``reference_km`` runs at ``target_bps``."""
    base = base or RateParams()
    snr_target = 2.0 ** (target_bps / base.bandwidth_hz) - 1.0
    noise = base.boltzmann * base.noise_temp_k * base.bandwidth_hz
    loss = float(free_space_loss(reference_km, base.carrier_hz))
    if base.tx_power_w <= 0:
        raise ValueError("cannot calibrate with zero transmit power")
    gain = math.sqrt(snr_target * noise * loss / base.tx_power_w)
    return replace(base, antenna_gain=gain)


# --- time weights ----------------------------------------------------------


def remaining_durations(feasible: np.ndarray, slot_seconds: float) -> tuple[np.ndarray, np.ndarray]:
    """Total remaining and residual visible time along the last axis.

    ``total[t]`` counts every feasible slot from ``t`` to the horizon end;
    ``residual[t]`` counts the unbroken run starting at ``t``.  Both are 0
    where ``feasible[t]`` is False.
    """
    f = np.asarray(feasible, dtype=bool)
    total = np.cumsum(f[..., ::-1], axis=-1)[..., ::-1] * f
    run = np.zeros(f.shape, dtype=np.int64)
    nxt = np.zeros(f.shape[:-1], dtype=np.int64)
    for t in range(f.shape[-1] - 1, -1, -1):
        nxt = np.where(f[..., t], nxt + 1, 0)
        run[..., t] = nxt
    return total * slot_seconds, run * slot_seconds


def time_weight_value(total_s, total_max, residual_s, residual_max):
    return (np.asarray(total_s) / total_max) * (np.asarray(residual_s) / residual_max)


@dataclass(frozen=True)
class CandidateIlc:
    endpoint_a: SatelliteId
    endpoint_b: SatelliteId
    visible_slots: tuple[int, ...]
    total_remaining_s: dict[int, float] = field(default_factory=dict)
    residual_s: dict[int, float] = field(default_factory=dict)
    weight: dict[int, float] = field(default_factory=dict)


def time_weight(candidate: CandidateIlc, t: int) -> float:
    if t not in candidate.weight:
        raise KeyError(f"slot {t} is not an admitted slot of this candidate")
    return candidate.weight[t]


@dataclass(frozen=True)
class SlotCandidates:
    """Admitted candidates of one slot as parallel arrays (flat layer indices)."""

    slot: int
    a: np.ndarray
    b: np.ndarray
    distance_km: np.ndarray
    weight: np.ndarray
    total_remaining_s: np.ndarray
    residual_s: np.ndarray

    def __len__(self) -> int:
        return len(self.a)


@dataclass
class CandidateSet:
    """Feasible cross-layer pairs over a horizon.

    Cubes are indexed ``[a, b, slot]``.  ``physical`` holds visibility and
    co-motion; ``admitted`` additionally applies the weight thresholds.
    """

    eph_a: Ephemeris
    eph_b: Ephemeris
    eta1: float
    eta2: float
    distance_km: np.ndarray
    physical: np.ndarray
    total_remaining_s: np.ndarray
    residual_s: np.ndarray
    weight: np.ndarray
    admitted: np.ndarray
    _slots: dict = field(default_factory=dict, repr=False)

    @property
    def layers(self) -> tuple[int, int]:
        return self.eph_a.layer.index, self.eph_b.layer.index

    @property
    def n_slots(self) -> int:
        return self.admitted.shape[2]

    def at(self, t: int) -> SlotCandidates:
        if t not in self._slots:
            a, b = np.nonzero(self.admitted[:, :, t])
            self._slots[t] = SlotCandidates(
                slot=t,
                a=a,
                b=b,
                distance_km=self.distance_km[a, b, t],
                weight=self.weight[a, b, t],
                total_remaining_s=self.total_remaining_s[a, b, t],
                residual_s=self.residual_s[a, b, t],
            )
        return self._slots[t]

    def contains(self, a: int, b: int, t: int) -> bool:
        return bool(self.admitted[a, b, t])

    def pairs(self) -> list[CandidateIlc]:
        la, lb = self.layers
        Sa = self.eph_a.layer.spec.sats_per_plane
        Sb = self.eph_b.layer.spec.sats_per_plane
        out = []
        for a, b in zip(*np.nonzero(self.admitted.any(axis=2))):
            slots = tuple(int(t) for t in np.nonzero(self.admitted[a, b])[0])
            out.append(
                CandidateIlc(
                    SatelliteId.from_flat(la, int(a), Sa),
                    SatelliteId.from_flat(lb, int(b), Sb),
                    slots,
                    {t: float(self.total_remaining_s[a, b, t]) for t in slots},
                    {t: float(self.residual_s[a, b, t]) for t in slots},
                    {t: float(self.weight[a, b, t]) for t in slots},
                )
            )
        return out

    def to_csv(self, path: str | Path) -> None:
        la, lb = self.layers
        Sa = self.eph_a.layer.spec.sats_per_plane
        Sb = self.eph_b.layer.spec.sats_per_plane
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["layer_a", "plane_a", "slot_a", "layer_b", "plane_b", "slot_b",
                        "slot_index", "distance_km", "weight"])
            for t in range(self.n_slots):
                sc = self.at(t)
                for a, b, d, wt in zip(sc.a, sc.b, sc.distance_km, sc.weight):
                    w.writerow([la, a // Sa, a % Sa, lb, b // Sb, b % Sb, t, f"{d:.6f}", f"{wt:.6f}"])


def build_candidate_set(
    eph_a: Ephemeris,
    eph_b: Ephemeris,
    eta1: float = 0.1,
    eta2: float = 0.9,
    grazing_km: float | None = None,
) -> CandidateSet:
    """Visible, co-moving cross-layer pairs with per-slot time weights.

    Weights are normalised by the largest total-remaining and residual time
    among the physically feasible pairs of the same slot.
    """
    if eph_a.layer.index == eph_b.layer.index:
        raise ValueError("candidate sets pair two different layers")
    if eph_a.n_sats == 0 or eph_b.n_sats == 0:
        raise ValueError("empty ephemeris")
    if eph_a.n_slots != eph_b.n_slots:
        raise ValueError("ephemerides cover different horizons")
    d = pairwise_distances(eph_a, eph_b)
    d_max = max_los_distance(eph_a.layer.spec.altitude_km, eph_b.layer.spec.altitude_km)
    visible = d <= d_max
    if grazing_km is not None:
        visible &= segment_clears_earth(
            eph_a.ecef_km[:, None], eph_b.ecef_km[None, :], R_EARTH_KM + grazing_km
        )
    comoving = eph_a.dlat_deg[:, None, :] * eph_b.dlat_deg[None, :, :] > 0
    physical = visible & comoving
    total, residual = remaining_durations(physical, eph_a.grid.slot_seconds)
    tmax = total.max(axis=(0, 1))
    rmax = residual.max(axis=(0, 1))
    with np.errstate(invalid="ignore", divide="ignore"):
        weight = np.where(
            physical, time_weight_value(total, np.where(tmax > 0, tmax, 1), residual,
                                        np.where(rmax > 0, rmax, 1)), 0.0
        )
    admitted = physical & (weight >= eta1) & (weight <= eta2)
    return CandidateSet(
        eph_a, eph_b, eta1, eta2, d, physical, total.astype(float), residual.astype(float), weight, admitted
    )
