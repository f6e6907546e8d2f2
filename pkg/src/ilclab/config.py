"""YAML scenario files.

A scenario names the layer stack (tandem order), the time grid, the
strategy and its parameters, the ILC count or sweep, link-rate parameters,
weight thresholds and an optional traffic block.  Unknown keys are errors;
every error carries the dotted path of the offending field.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import yaml

from .constellation import TimeGrid, ValidationError, WalkerSpec, load_presets, preset_pairs
from .linkmodel import RateParams
from .optimizer.otlc import GaConfig
from .optimizer.strategies import STRATEGIES
from .optimizer.tpilcd import TpilcdConfig


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class TimeConfig:
    epoch: str = "2022-08-01T10:00:00Z"
    slot_seconds: float = 60.0
    n_slots: int = 60
    lookahead: int = 30

    def grid(self) -> TimeGrid:
        when = datetime.fromisoformat(self.epoch.replace("Z", "+00:00"))
        if when.tzinfo is None:
            when = when.replace(tzinfo=timezone.utc)
        return TimeGrid(when, self.slot_seconds, self.n_slots)


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str = "tpilcd"
    k: int | None = 12
    k_range: tuple[int, int] | None = None
    compare: tuple[str, ...] = ("tpilcd", "greedy", "random", "max-time-weight")
    ga: GaConfig = field(default_factory=GaConfig)
    polish: bool = True
    apl_slack: float = 0.01
    hysteresis: bool = True
    track_swaps: int = 1
    track_gain: float = 0.005
    exact_budget: float = 1e7
    capabilities: tuple[int, ...] = ()

    def ks(self) -> list[int]:
        if self.k_range is not None:
            lo, hi = self.k_range
            return list(range(lo, hi + 1))
        return [self.k if self.k is not None else 0]

    def tpilcd_config(self, seed: int, max_per_plane: int | None = None, n_slots: int | None = None) -> TpilcdConfig:
        ga = GaConfig(**{**asdict(self.ga), "rng_seed": seed})
        return TpilcdConfig(ga=ga, polish=self.polish, apl_slack=self.apl_slack,
                            hysteresis=self.hysteresis, max_per_plane=max_per_plane, n_slots=n_slots,
                            track_swaps=self.track_swaps, track_gain=self.track_gain)


@dataclass(frozen=True)
class RateConfig:
    bandwidth_hz: float = 20e6
    tx_power_w: float = 3.74
    carrier_hz: float = 26e9
    noise_temp_k: float = 354.18
    target_bps: float = 1e9
    reference_km: float | None = None  # default: mean intra-layer link length at the first slot

    def params(self) -> RateParams:
        return RateParams(self.bandwidth_hz, self.tx_power_w, 1.0, self.carrier_hz,
                          noise_temp_k=self.noise_temp_k)


@dataclass(frozen=True)
class TrafficConfig:
    cities: str = "builtin"
    n_flows: int = 1000
    volume_bps: float = 10e6
    access_layers: tuple[int, ...] = (0,)
    min_elevation_deg: float = 10.0
    seed: int | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    layers: tuple[WalkerSpec, ...]
    time: TimeConfig = field(default_factory=TimeConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    rates: RateConfig = field(default_factory=RateConfig)
    eta1: float = 0.1
    eta2: float = 0.9
    traffic: TrafficConfig | None = None
    seed: int = 0
    output: str = "out"

    def canonical(self) -> dict:
        return json.loads(json.dumps(asdict(self), default=str))

    def digest(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# --- parsing ---------------------------------------------------------------


def _check_keys(raw: dict, allowed, path: str) -> None:
    if not isinstance(raw, dict):
        raise ConfigError(path, f"expected a mapping, got {type(raw).__name__}")
    extra = sorted(set(raw) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}" if path else extra[0], "unknown key")


def _build(cls, raw: dict | None, path: str, **override):
    raw = dict(raw or {})
    names = [f.name for f in fields(cls)]
    _check_keys(raw, names, path)
    raw.update(override)
    for f in fields(cls):
        if f.type in ("float", "float | None") and isinstance(raw.get(f.name), str):
            # YAML 1.1 reads exponents without a sign, such as 20e6, as strings
            try:
                raw[f.name] = float(raw[f.name])
            except ValueError:
                raise ConfigError(f"{path}.{f.name}" if path else f.name, "expected a number") from None
    try:
        return cls(**raw)
    except ValidationError as exc:
        raise ConfigError(f"{path}.{exc.field}" if path else exc.field, str(exc).split(": ", 1)[-1]) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(path or cls.__name__, str(exc)) from None


def _layer(raw: Any, path: str) -> WalkerSpec:
    presets = load_presets()
    if isinstance(raw, str):
        if raw in presets:
            return presets[raw]
        try:
            return WalkerSpec.parse(raw)
        except ValidationError as exc:
            raise ConfigError(path, f"not a preset name or N/P/F:H:i spec ({exc})") from None
    if isinstance(raw, dict):
        if "preset" in raw:
            base = presets.get(raw["preset"])
            if base is None:
                raise ConfigError(f"{path}.preset", f"unknown preset {raw['preset']!r}")
            merged = {**asdict(base), **{k: v for k, v in raw.items() if k != "preset"}}
            return _build(WalkerSpec, merged, path)
        return _build(WalkerSpec, raw, path)
    raise ConfigError(path, "expected a preset name, an N/P/F:H:i string or a mapping")


def _positive_int(v, path: str, minimum: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(path, f"expected an integer >= {minimum}, got {v!r}")
    return v


def parse_scenario(raw: dict, name: str = "scenario") -> Scenario:
    _check_keys(raw, [f.name for f in fields(Scenario)] + ["pair"], "")
    if "pair" in raw:
        if "layers" in raw:
            raise ConfigError("pair", "give either pair or layers, not both")
        pairs = preset_pairs()
        if raw["pair"] not in pairs:
            raise ConfigError("pair", f"unknown preset pair {raw['pair']!r}")
        layer_raw = list(pairs[raw["pair"]])
    else:
        layer_raw = raw.get("layers")
    if not isinstance(layer_raw, list) or len(layer_raw) < 2:
        raise ConfigError("layers", "need a list of at least two layers in tandem order")
    layers = tuple(_layer(v, f"layers[{i}]") for i, v in enumerate(layer_raw))

    time = _build(TimeConfig, raw.get("time"), "time")
    _positive_int(time.n_slots, "time.n_slots", 1)
    _positive_int(time.lookahead, "time.lookahead", 0)
    try:
        time.grid()
    except ValidationError as exc:
        raise ConfigError(f"time.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    except ValueError as exc:
        raise ConfigError("time.epoch", str(exc)) from None

    opt_raw = dict(raw.get("optimizer") or {})
    ga = _build(GaConfig, opt_raw.pop("ga", None), "optimizer.ga")
    for key in ("k_range",):
        if opt_raw.get(key) is not None:
            v = opt_raw[key]
            if not (isinstance(v, list) and len(v) == 2):
                raise ConfigError(f"optimizer.{key}", "expected [low, high]")
            lo = _positive_int(v[0], f"optimizer.{key}[0]")
            hi = _positive_int(v[1], f"optimizer.{key}[1]", lo)
            opt_raw[key] = (lo, hi)
    for key in ("compare", "capabilities"):
        if key in opt_raw:
            opt_raw[key] = tuple(opt_raw[key])
    opt = _build(OptimizerConfig, opt_raw, "optimizer", ga=ga)
    for i, algo in enumerate((opt.algorithm,) + opt.compare):
        if algo not in STRATEGIES:
            where = "optimizer.algorithm" if i == 0 else f"optimizer.compare[{i - 1}]"
            raise ConfigError(where, f"unknown algorithm {algo!r}; choose from {', '.join(STRATEGIES)}")
    if opt.k is not None:
        _positive_int(opt.k, "optimizer.k")
    for i, c in enumerate(opt.capabilities):
        _positive_int(c, f"optimizer.capabilities[{i}]", 1)

    rates = _build(RateConfig, raw.get("rates"), "rates")
    try:
        rates.params()
    except ValidationError as exc:
        raise ConfigError(f"rates.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    if rates.reference_km is not None and not rates.reference_km > 0:
        raise ConfigError("rates.reference_km", "must be > 0")

    traffic = None
    if raw.get("traffic") is not None:
        t_raw = dict(raw["traffic"])
        if "access_layers" in t_raw:
            t_raw["access_layers"] = tuple(t_raw["access_layers"])
        traffic = _build(TrafficConfig, t_raw, "traffic")
        _positive_int(traffic.n_flows, "traffic.n_flows")
        for i, layer in enumerate(traffic.access_layers):
            if not (isinstance(layer, int) and 0 <= layer < len(layers)):
                raise ConfigError(f"traffic.access_layers[{i}]", f"no layer {layer!r}")
        if not traffic.volume_bps > 0:
            raise ConfigError("traffic.volume_bps", "must be > 0")

    eta1, eta2 = raw.get("eta1", 0.1), raw.get("eta2", 0.9)
    for key, v in (("eta1", eta1), ("eta2", eta2)):
        if not isinstance(v, (int, float)) or not 0 <= v <= 1:
            raise ConfigError(key, f"must lie in [0, 1], got {v!r}")
    if eta1 > eta2:
        raise ConfigError("eta1", "must not exceed eta2")
    seed = _positive_int(raw.get("seed", 0), "seed")
    return Scenario(str(raw.get("name", name)), layers, time, opt, rates, float(eta1), float(eta2),
                    traffic, seed, str(raw.get("output", "out")))


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        raw = yaml.safe_load(p.read_text())
    except OSError as exc:
        raise ConfigError(str(p), f"cannot read: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(str(p), f"invalid YAML: {exc}") from None
    if raw is None:
        raise ConfigError("", "empty scenario file")
    return parse_scenario(raw, p.stem)
