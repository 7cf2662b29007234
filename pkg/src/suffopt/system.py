"""Carrier/technology graph, cost annualization, and availability synthesis.

Defines everything the LP builder consumes: conversion and renewable
technologies with published 2035 cost rows, storage technologies, the
carrier assignment of demand slices, and synthetic hourly capacity-factor
series.  Conversion efficiencies and renewable potential limits are
configurable defaults, not published values.
"""
from __future__ import annotations

import csv
import json
import zlib
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .base import (
    Carrier,
    ConfigError,
    DEFAULT_CARRIER_SPLIT,
    HOURS_PER_YEAR,
    Sector,
)
from .demand import DemandProfile, downsample_values


def annualize(invest_cost: float, lifetime: float, rate: float) -> float:
    """Annuity payment equivalent to an up-front investment cost.

    cost * rate(1+rate)^L / ((1+rate)^L - 1); the zero-rate limit is
    straight-line cost/L.  Units follow the input (EUR/kW -> EUR/kW/a).
    """
    if lifetime <= 0:
        raise ConfigError(f"lifetime must be positive, got {lifetime}")
    if rate < 0:
        raise ConfigError(f"rate must be non-negative, got {rate}")
    if rate == 0:
        return invest_cost / lifetime
    growth = (1.0 + rate) ** lifetime
    return invest_cost * rate * growth / (growth - 1.0)


@dataclass(eq=False)
class Technology:
    """Conversion or renewable generation asset.

    ``efficiency`` is output energy per input energy (1.0 for primary
    renewables, which have no input carrier).  ``availability`` is an
    optional hourly capacity-factor series; None means always available.
    """

    name: str
    output_carrier: Carrier
    input_carrier: Carrier | None = None
    efficiency: float = 1.0
    invest_cost: float = 0.0       # EUR/kW
    fixed_op_cost: float = 0.0     # EUR/kW/a
    lifetime: float = 25.0         # years
    potential_limit: float | None = None   # GW
    availability: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.efficiency <= 1.5):
            raise ConfigError(f"{self.name}: efficiency {self.efficiency} outside (0, 1.5]")
        if self.lifetime <= 0:
            raise ConfigError(f"{self.name}: lifetime must be positive")
        if self.potential_limit is not None and self.potential_limit < 0:
            raise ConfigError(f"{self.name}: negative potential limit")
        if self.availability is not None:
            self.availability = np.asarray(self.availability, dtype=float)
            if np.any(self.availability < 0) or np.any(self.availability > 1):
                raise ConfigError(f"{self.name}: availability outside [0, 1]")

    @property
    def is_primary(self) -> bool:
        return self.input_carrier is None

    def annualized_cost(self, rate: float) -> float:
        """EUR/kW/a of capacity: annuitized investment plus fixed O&M."""
        return annualize(self.invest_cost, self.lifetime, rate) + self.fixed_op_cost


@dataclass(eq=False)
class StorageTechnology:
    name: str
    carrier: Carrier
    energy_cost: float             # EUR/kWh
    power_cost: float              # EUR/kW
    lifetime: float                # years
    charge_eff: float = 1.0
    discharge_eff: float = 1.0
    energy_to_power_limit: float | None = None   # max GWh per GW
    energy_potential: float | None = None        # GWh cap, e.g. pumped hydro

    def __post_init__(self) -> None:
        for label, eff in (("charge", self.charge_eff), ("discharge", self.discharge_eff)):
            if not (0.0 < eff <= 1.0):
                raise ConfigError(f"{self.name}: {label} efficiency {eff} outside (0, 1]")
        if self.energy_cost < 0 or self.power_cost < 0:
            raise ConfigError(f"{self.name}: negative cost")
        if self.lifetime <= 0:
            raise ConfigError(f"{self.name}: lifetime must be positive")

    def annualized_energy_cost(self, rate: float) -> float:
        return annualize(self.energy_cost, self.lifetime, rate)

    def annualized_power_cost(self, rate: float) -> float:
        return annualize(self.power_cost, self.lifetime, rate)


@dataclass(frozen=True)
class CarrierMap:
    """Which carrier(s) serve each (sector, subsector), with split fractions."""

    splits: dict[tuple[Sector, str], dict[Carrier, float]]

    def __post_init__(self) -> None:
        for key, fractions in self.splits.items():
            total = sum(fractions.values())
            if abs(total - 1.0) > 1e-9:
                raise ConfigError(f"carrier split for {key} sums to {total!r}")

    @classmethod
    def default(cls) -> "CarrierMap":
        return cls({k: dict(v) for k, v in DEFAULT_CARRIER_SPLIT.items()})


@dataclass(eq=False)
class SystemConfig:
    """Immutable-after-validation bundle the LP builder consumes.

    ``horizon_steps`` is the number of timesteps of every availability
    series (8760 at native resolution).
    """

    technologies: list[Technology]
    storages: list[StorageTechnology]
    carrier_map: CarrierMap
    discount_rate: float = 0.05
    horizon_steps: int = HOURS_PER_YEAR

    def __post_init__(self) -> None:
        if not (0.0 <= self.discount_rate <= 0.2):
            raise ConfigError(f"discount rate {self.discount_rate} outside [0, 0.2]")
        names = [t.name for t in self.technologies] + [s.name for s in self.storages]
        if len(set(names)) != len(names):
            raise ConfigError("duplicate technology/storage names")
        for tech in self.technologies:
            if tech.availability is not None and len(tech.availability) != self.horizon_steps:
                raise ConfigError(
                    f"{tech.name}: availability length {len(tech.availability)} "
                    f"!= horizon {self.horizon_steps}"
                )

    def technology(self, name: str) -> Technology:
        for tech in self.technologies:
            if tech.name == name:
                return tech
        raise KeyError(name)

    def storage(self, name: str) -> StorageTechnology:
        for s in self.storages:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def renewables(self) -> list[Technology]:
        return [t for t in self.technologies if t.is_primary]

    def downsampled(self, n_steps: int) -> "SystemConfig":
        """Copy with availability series aggregated to ``n_steps`` blocks."""
        if self.horizon_steps != HOURS_PER_YEAR:
            raise ConfigError("can only downsample a full-resolution system")
        techs = [
            replace(
                t,
                availability=None if t.availability is None
                else downsample_values(t.availability, n_steps),
            )
            for t in self.technologies
        ]
        return SystemConfig(
            techs, list(self.storages), self.carrier_map,
            self.discount_rate, n_steps,
        )


# ---------------------------------------------------------------------------
# Availability synthesis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AvailabilityConfig:
    """Shape parameters for synthetic capacity-factor series."""

    kind: str                     # "solar" or "wind"
    target_cf: float
    seed: int = 42
    name: str = ""                # distinct names give distinct weather
    # solar shape
    daylight_halfwidth_mean: float = 6.0
    daylight_halfwidth_amplitude: float = 2.0
    intensity_seasonal_amplitude: float = 0.3
    # wind shape
    smoothing_hours: int = 72
    noise_scale: float = 2.2
    winter_boost: float = 0.5


def build_availability(cfg: AvailabilityConfig) -> np.ndarray:
    """Deterministic hourly capacity factors in [0, 1].

    Solar is a clipped diurnal/seasonal sinusoid (exactly zero at night);
    wind is smoothed seeded noise with a winter bias pushed through a
    logistic.  The realized annual mean lands within 0.01 of the target.
    """
    if not (0.0 < cfg.target_cf < 1.0):
        raise ConfigError(f"target capacity factor {cfg.target_cf} outside (0, 1)")
    if cfg.kind == "solar":
        series = _solar_series(cfg)
    elif cfg.kind == "wind":
        series = _wind_series(cfg)
    else:
        raise ConfigError(f"unknown availability kind {cfg.kind!r}")
    if abs(series.mean() - cfg.target_cf) > 0.01:
        raise ConfigError(
            f"{cfg.kind} synthesis missed target CF {cfg.target_cf} "
            f"(got {series.mean():.4f}); lower the target or widen the shape"
        )
    return series


def _solar_series(cfg: AvailabilityConfig) -> np.ndarray:
    hours = np.arange(HOURS_PER_YEAR)
    day, hod = hours // 24, hours % 24
    summer = np.cos(2 * np.pi * (day - 172) / 365.0)
    halfwidth = cfg.daylight_halfwidth_mean + cfg.daylight_halfwidth_amplitude * summer
    x = (hod - 12.5) / halfwidth
    raw = np.where(np.abs(x) < 1.0, np.cos(0.5 * np.pi * x), 0.0) ** 1.5
    raw *= 1.0 - cfg.intensity_seasonal_amplitude * (1.0 - summer) / 2.0
    if raw.mean() <= 0:
        raise ConfigError("solar shape degenerated to zero")
    # rescale toward the target; clipping at 1.0 only pulls the mean down,
    # so a few more passes push it back up for aggressive targets
    series = np.clip(raw * (cfg.target_cf / raw.mean()), 0.0, 1.0)
    for _ in range(8):
        if abs(series.mean() - cfg.target_cf) <= 0.005:
            break
        series = np.clip(series * (cfg.target_cf / series.mean()), 0.0, 1.0)
    return series


def _wind_series(cfg: AvailabilityConfig) -> np.ndarray:
    tag = zlib.crc32(f"wind/{cfg.name}".encode())
    rng = np.random.default_rng((cfg.seed, tag))
    noise = rng.standard_normal(HOURS_PER_YEAR)
    window = np.hanning(cfg.smoothing_hours)
    smooth = np.convolve(noise, window / window.sum(), mode="same")
    smooth = smooth / smooth.std()
    day = np.arange(HOURS_PER_YEAR) // 24
    seasonal = cfg.winter_boost * np.cos(2 * np.pi * (day - 15) / 365.0)
    drive = cfg.noise_scale * smooth + seasonal

    # pick the logistic offset so the annual mean hits the target exactly
    lo, hi = -30.0, 30.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _logistic_mean(drive, mid) < cfg.target_cf:
            lo = mid
        else:
            hi = mid
    return 1.0 / (1.0 + np.exp(-(drive + 0.5 * (lo + hi))))


def _logistic_mean(drive: np.ndarray, offset: float) -> float:
    return float((1.0 / (1.0 + np.exp(-(drive + offset)))).mean())


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    producible_twh: float = float("inf")
    required_primary_twh: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.errors


def chain_efficiencies(config: SystemConfig) -> dict[Carrier, float]:
    """Best conversion efficiency from a primary source to each carrier.

    Fixpoint over the technology graph; unreachable carriers are absent
    from the result.
    """
    eff: dict[Carrier, float] = {}
    for _ in range(len(config.technologies) + 1):
        changed = False
        for tech in config.technologies:
            if tech.is_primary:
                candidate = 1.0
            elif tech.input_carrier in eff:
                candidate = eff[tech.input_carrier] * tech.efficiency
            else:
                continue
            if candidate > eff.get(tech.output_carrier, 0.0):
                eff[tech.output_carrier] = candidate
                changed = True
        if not changed:
            break
    return eff


def validate_system(
    config: SystemConfig,
    profiles: Iterable[DemandProfile] = (),
    raise_on_error: bool = True,
) -> ValidationReport:
    """Check carrier reachability and an annual-energy feasibility bound.

    Unreachable demanded carriers are hard errors (raised unless
    ``raise_on_error`` is false).  The feasibility bound compares renewable
    potential x availability against chain-converted annual demand; storage
    shifts energy but cannot create it, so this is the in-principle ceiling.
    """
    report = ValidationReport()
    profiles = list(profiles)
    demanded = {p.carrier for p in profiles} or {
        carrier
        for fractions in config.carrier_map.splits.values()
        for carrier in fractions
    }

    eff = chain_efficiencies(config)
    for carrier in sorted(demanded, key=lambda c: c.value):
        if carrier not in eff:
            producers = [t.name for t in config.technologies if t.output_carrier is carrier]
            if producers:
                detail = "producers " + ", ".join(producers) + " have unreachable inputs"
            else:
                detail = "no technology outputs it"
            report.errors.append(f"{carrier.value} unreachable: {detail}")

    for tech in config.technologies:
        if tech.potential_limit == 0:
            report.warnings.append(f"{tech.name}: zero potential, can never be built")

    # annual-energy ceiling from availability-limited primaries
    producible = 0.0
    unlimited_primary = False
    for tech in config.renewables:
        if tech.potential_limit is None:
            unlimited_primary = True
            continue
        mean_cf = 1.0 if tech.availability is None else float(tech.availability.mean())
        producible += tech.potential_limit * mean_cf * HOURS_PER_YEAR / 1000.0  # TWh
    report.producible_twh = float("inf") if unlimited_primary else producible

    if profiles and not report.errors:
        required = 0.0
        for p in profiles:
            required += p.annual_gwh / 1000.0 / eff[p.carrier]
        report.required_primary_twh = required
        if report.producible_twh < required:
            report.errors.append(
                f"renewable potentials can supply at most {report.producible_twh:.0f} TWh "
                f"of primary energy but demand needs {required:.0f} TWh through the "
                "conversion chains"
            )
        elif report.producible_twh < 1.1 * required:
            report.warnings.append(
                f"renewable potentials ({report.producible_twh:.0f} TWh) barely cover "
                f"chain-converted demand ({required:.0f} TWh)"
            )

    if raise_on_error and report.errors:
        raise ConfigError("; ".join(report.errors))
    return report


# ---------------------------------------------------------------------------
# Default system (Figure-2 style graph)
# ---------------------------------------------------------------------------

# (invest EUR/kW, fixed O&M EUR/kW/a, lifetime a) for generation;
# efficiencies and potentials are package defaults, not published values.
GENERATION_COSTS = {
    "ccgtGas": (345.0, 8.6, 30.0),
    "ccgtHydrogen": (185.0, 3.3, 30.0),
    "methanation": (865.0, 18.0, 30.0),
    "electrolyzer": (543.0, 14.6, 30.0),
    "pvOpenspace": (407.0, 7.9, 25.0),
    "pvRooftop": (594.0, 11.5, 25.0),
    "pvAgriculture": (814.0, 7.9, 25.0),
    "windOnshore": (1200.0, 30.0, 25.0),
    "windOffshore": (3111.0, 100.0, 25.0),
}

# (energy EUR/kWh, power EUR/kW, lifetime a)
STORAGE_COSTS = {
    "liIonBattery": (218.0, 84.2, 18.0),
    "pumpedHydro": (10.0, 745.0, 60.0),
    "gasStorageHydrogen": (0.1, 0.1, 30.0),
    "gasStorageGas": (0.1, 0.1, 30.0),
    "caes": (26.4, 455.0, 30.0),
}

DEFAULT_POTENTIALS_GW = {
    "pvOpenspace": 400.0,
    "pvRooftop": 300.0,
    "pvAgriculture": 160.0,
    "windOnshore": 400.0,
    "windOffshore": 140.0,
}

DEFAULT_TARGET_CF = {"solar": 0.12, "windOnshore": 0.32, "windOffshore": 0.48}

PUMPED_HYDRO_ENERGY_GWH = 40.0


def default_system(seed: int = 42, discount_rate: float = 0.05) -> SystemConfig:
    """Full-resolution default system with synthesized availability."""
    solar = build_availability(
        AvailabilityConfig("solar", DEFAULT_TARGET_CF["solar"], seed=seed, name="solar")
    )
    wind_on = build_availability(
        AvailabilityConfig("wind", DEFAULT_TARGET_CF["windOnshore"], seed=seed, name="windOnshore")
    )
    wind_off = build_availability(
        AvailabilityConfig("wind", DEFAULT_TARGET_CF["windOffshore"], seed=seed, name="windOffshore")
    )

    def gen(name, output, inp=None, eff=1.0, potential=None, availability=None):
        invest, fom, life = GENERATION_COSTS[name]
        return Technology(
            name, output, inp, eff, invest, fom, life, potential, availability
        )

    technologies = [
        gen("ccgtGas", Carrier.ELECTRICITY, Carrier.SYNTHETIC_GAS, 0.60),
        gen("ccgtHydrogen", Carrier.ELECTRICITY, Carrier.HYDROGEN, 0.60),
        gen("methanation", Carrier.SYNTHETIC_GAS, Carrier.HYDROGEN, 0.80),
        gen("electrolyzer", Carrier.HYDROGEN, Carrier.ELECTRICITY, 0.70),
        gen("pvOpenspace", Carrier.ELECTRICITY,
            potential=DEFAULT_POTENTIALS_GW["pvOpenspace"], availability=solar),
        gen("pvRooftop", Carrier.ELECTRICITY,
            potential=DEFAULT_POTENTIALS_GW["pvRooftop"], availability=solar),
        gen("pvAgriculture", Carrier.ELECTRICITY,
            potential=DEFAULT_POTENTIALS_GW["pvAgriculture"], availability=solar),
        gen("windOnshore", Carrier.ELECTRICITY,
            potential=DEFAULT_POTENTIALS_GW["windOnshore"], availability=wind_on),
        gen("windOffshore", Carrier.ELECTRICITY,
            potential=DEFAULT_POTENTIALS_GW["windOffshore"], availability=wind_off),
    ]

    def store(name, carrier, charge_eff, discharge_eff, energy_potential=None):
        e_cost, p_cost, life = STORAGE_COSTS[name]
        return StorageTechnology(
            name, carrier, e_cost, p_cost, life, charge_eff, discharge_eff,
            energy_potential=energy_potential,
        )

    storages = [
        store("liIonBattery", Carrier.ELECTRICITY, 0.96, 0.96),
        store("pumpedHydro", Carrier.ELECTRICITY, 0.89, 0.89,
              energy_potential=PUMPED_HYDRO_ENERGY_GWH),
        store("gasStorageHydrogen", Carrier.HYDROGEN, 1.0, 1.0),
        store("gasStorageGas", Carrier.SYNTHETIC_GAS, 1.0, 1.0),
        store("caes", Carrier.ELECTRICITY, 0.85, 0.82),
    ]

    return SystemConfig(technologies, storages, CarrierMap.default(), discount_rate)


# ---------------------------------------------------------------------------
# JSON config and availability CSV (schemas in docs/system_format.md)
# ---------------------------------------------------------------------------

def system_to_dict(config: SystemConfig, include_availability: bool = False) -> dict:
    techs = []
    for t in config.technologies:
        entry = {
            "name": t.name,
            "output_carrier": t.output_carrier.value,
            "input_carrier": t.input_carrier.value if t.input_carrier else None,
            "efficiency": t.efficiency,
            "invest_cost_eur_per_kw": t.invest_cost,
            "fixed_op_cost_eur_per_kw_a": t.fixed_op_cost,
            "lifetime_years": t.lifetime,
            "potential_gw": t.potential_limit,
        }
        if include_availability and t.availability is not None:
            entry["availability"] = t.availability.tolist()
        techs.append(entry)
    return {
        "discount_rate": config.discount_rate,
        "technologies": techs,
        "storages": [
            {
                "name": s.name,
                "carrier": s.carrier.value,
                "energy_cost_eur_per_kwh": s.energy_cost,
                "power_cost_eur_per_kw": s.power_cost,
                "lifetime_years": s.lifetime,
                "charge_eff": s.charge_eff,
                "discharge_eff": s.discharge_eff,
                "energy_to_power_limit": s.energy_to_power_limit,
                "energy_potential_gwh": s.energy_potential,
            }
            for s in config.storages
        ],
        "carrier_map": {
            f"{sector.value}/{sub}": {c.value: f for c, f in fractions.items()}
            for (sector, sub), fractions in config.carrier_map.splits.items()
        },
    }


def system_from_dict(data: Mapping, seed: int = 42) -> SystemConfig:
    """Rebuild a system; techs without stored availability get it synthesized
    when their name carries a default capacity-factor target."""
    try:
        technologies = []
        for t in data["technologies"]:
            availability = t.get("availability")
            if availability is None and t.get("potential_gw") is not None:
                kind = "solar" if t["name"].startswith("pv") else "wind"
                target = DEFAULT_TARGET_CF.get(t["name"], DEFAULT_TARGET_CF.get(kind))
                if target:
                    availability = build_availability(
                        AvailabilityConfig(kind, target, seed=seed,
                                           name="solar" if kind == "solar" else t["name"])
                    )
            technologies.append(
                Technology(
                    name=t["name"],
                    output_carrier=Carrier(t["output_carrier"]),
                    input_carrier=Carrier(t["input_carrier"]) if t.get("input_carrier") else None,
                    efficiency=t.get("efficiency", 1.0),
                    invest_cost=t.get("invest_cost_eur_per_kw", 0.0),
                    fixed_op_cost=t.get("fixed_op_cost_eur_per_kw_a", 0.0),
                    lifetime=t.get("lifetime_years", 25.0),
                    potential_limit=t.get("potential_gw"),
                    availability=availability,
                )
            )
        storages = [
            StorageTechnology(
                name=s["name"],
                carrier=Carrier(s["carrier"]),
                energy_cost=s["energy_cost_eur_per_kwh"],
                power_cost=s["power_cost_eur_per_kw"],
                lifetime=s["lifetime_years"],
                charge_eff=s.get("charge_eff", 1.0),
                discharge_eff=s.get("discharge_eff", 1.0),
                energy_to_power_limit=s.get("energy_to_power_limit"),
                energy_potential=s.get("energy_potential_gwh"),
            )
            for s in data["storages"]
        ]
        splits = {}
        for key, fractions in data["carrier_map"].items():
            sector_name, _, sub = key.partition("/")
            splits[(Sector(sector_name), sub)] = {
                Carrier(c): f for c, f in fractions.items()
            }
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed system config: {exc}") from exc
    return SystemConfig(
        technologies, storages, CarrierMap(splits),
        data.get("discount_rate", 0.05),
    )


def load_system(path: str | Path, seed: int = 42) -> SystemConfig:
    with open(path) as fh:
        return system_from_dict(json.load(fh), seed=seed)


def save_system(config: SystemConfig, path: str | Path,
                include_availability: bool = False) -> None:
    data = system_to_dict(config, include_availability=include_availability)
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def export_availability(config: SystemConfig, target) -> None:
    """CSV ``tech,hour,cf`` for every availability-limited technology."""
    def write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tech", "hour", "cf"])
        for tech in config.technologies:
            if tech.availability is None:
                continue
            for hour, cf in enumerate(tech.availability):
                writer.writerow([tech.name, hour, repr(float(cf))])

    if hasattr(target, "write"):
        write(target)
    else:
        with open(target, "w", newline="") as fh:
            write(fh)


def import_availability(config: SystemConfig, source) -> SystemConfig:
    """Replace availability series from a ``tech,hour,cf`` CSV."""
    def read(fh):
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["tech", "hour", "cf"]:
            raise ConfigError("row 1: expected header tech,hour,cf")
        series: dict[str, dict[int, float]] = {}
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ConfigError(f"row {row_no}: expected 3 fields")
            name, raw_hour, raw_cf = row
            try:
                hour, cf = int(raw_hour), float(raw_cf)
            except ValueError:
                raise ConfigError(f"row {row_no}: malformed hour/cf") from None
            if not (0.0 <= cf <= 1.0):
                raise ConfigError(f"row {row_no}: cf {cf} outside [0, 1]")
            series.setdefault(name, {})[hour] = cf
        return series

    if hasattr(source, "read"):
        series = read(source)
    else:
        with open(source, newline="") as fh:
            series = read(fh)

    techs = []
    for tech in config.technologies:
        if tech.name in series:
            values = series[tech.name]
            if sorted(values) != list(range(config.horizon_steps)):
                raise ConfigError(
                    f"{tech.name}: availability must cover hours 0..{config.horizon_steps - 1}"
                )
            arr = np.array([values[h] for h in range(config.horizon_steps)])
            techs.append(replace(tech, availability=arr))
        else:
            techs.append(tech)
    return SystemConfig(
        techs, list(config.storages), config.carrier_map,
        config.discount_rate, config.horizon_steps,
    )
