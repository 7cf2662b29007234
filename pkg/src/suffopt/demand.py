"""Hourly final-energy demand profiles: synthesis, CSV ingest, reductions.

Profiles are keyed by (sector, subsector, carrier) and hold GWh-per-hour
values over a full 8760-hour year or a downsampled horizon.  The synthetic
shapes (winter-peaked heat, daily/weekly electricity pattern, commuting
bumps for mobility) are plausibility stand-ins with configurable
parameters; they are not derived from any measured dataset.
"""
from __future__ import annotations

import csv
import io
import zlib
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, replace

import numpy as np

from .base import (
    Carrier,
    ConfigError,
    DEFAULT_CARRIER_SPLIT,
    HOURS_PER_YEAR,
    Sector,
    SUBSECTORS,
)
from .measures import Catalog, ReductionSet, default_catalog

BUDGET_RTOL = 1e-3  # annual sum must match the declared budget to 0.1%

CSV_HEADER = ["sector", "subsector", "carrier", "hour", "value_gwh"]


@dataclass(frozen=True)
class DemandProfile:
    """One (sector, subsector, carrier) slice as an hourly series.

    ``values`` are mean GWh per hour within each step.  ``step_hours`` is
    1.0 at full resolution; after downsampling it is the array of block
    lengths in hours (summing to 8760), so ``annual_gwh`` stays exact.
    """

    sector: Sector
    subsector: str
    carrier: Carrier
    values: np.ndarray
    year_label: int = 2050
    step_hours: float | np.ndarray = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1 or len(self.values) == 0:
            raise ConfigError(f"{self.key}: profile must be a non-empty 1-d series")
        if np.any(self.values < 0):
            raise ConfigError(f"{self.key}: negative demand values")
        if self.subsector not in SUBSECTORS[self.sector]:
            raise ConfigError(f"{self.key}: unknown subsector")

    @property
    def key(self) -> str:
        return f"{self.sector.value}/{self.subsector}/{self.carrier.value}"

    @property
    def annual_gwh(self) -> float:
        return float(np.sum(self.values * self.step_hours))

    def scaled(self, factor: float) -> "DemandProfile":
        return replace(self, values=self.values * factor)


@dataclass(frozen=True)
class DemandBudget:
    """Annual budget split over sectors and subsectors via catalog shares."""

    total_twh: float
    catalog: Catalog

    def __post_init__(self) -> None:
        if self.total_twh <= 0:
            raise ConfigError(f"total demand must be positive, got {self.total_twh}")

    def sector_twh(self, sector: Sector) -> float:
        return self.total_twh * self.catalog.sector_shares[sector]

    def slice_twh(self, sector: Sector, subsector: str) -> float:
        return self.sector_twh(sector) * self.catalog.subsector_shares[sector][subsector]


@dataclass(frozen=True)
class ShapeConfig:
    """Parameters of the synthetic demand shapes (not literature-derived)."""

    seed: int = 42
    flat: bool = False
    heat_seasonal_amplitude: float = 0.6   # winter peak, fraction of mean
    heat_diurnal_amplitude: float = 0.3
    process_seasonal_amplitude: float = 0.1
    electricity_diurnal_amplitude: float = 0.25
    weekend_factor: float = 0.88
    commuting_hours: tuple[int, ...] = (7, 8, 9, 17, 18, 19)
    commuting_boost: float = 0.8
    aviation_diurnal_amplitude: float = 0.2
    noise_sd: float = 0.0
    year_label: int = 2050


def _hour_grid(n: int = HOURS_PER_YEAR) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    hours = np.arange(n)
    day = hours // 24
    hod = hours % 24
    return day, hod, day % 7


def _slice_shape(sector: Sector, subsector: str, cfg: ShapeConfig) -> np.ndarray:
    """Unnormalized hourly shape for one demand slice."""
    if cfg.flat:
        return np.ones(HOURS_PER_YEAR)
    day, hod, weekday = _hour_grid()
    winter = np.cos(2 * np.pi * (day - 15) / 365.0)

    if sector is Sector.HEAT:
        if subsector == "residential_commercial":
            seasonal = 1.0 + cfg.heat_seasonal_amplitude * winter
            diurnal = 1.0 + cfg.heat_diurnal_amplitude * np.cos(
                2 * np.pi * (hod - 18) / 24.0
            )
            shape = seasonal * diurnal
        else:
            shape = 1.0 + cfg.process_seasonal_amplitude * winter
    elif sector is Sector.ELECTRICITY:
        diurnal = 1.0 + cfg.electricity_diurnal_amplitude * np.cos(
            2 * np.pi * (hod - 13) / 24.0
        )
        week = np.where(weekday < 5, 1.0, cfg.weekend_factor)
        shape = diurnal * week
    else:  # mobility
        if subsector == "air":
            shape = 1.0 + cfg.aviation_diurnal_amplitude * np.cos(
                2 * np.pi * (hod - 14) / 24.0
            )
        else:
            bump = np.isin(hod, cfg.commuting_hours).astype(float)
            shape = 1.0 + cfg.commuting_boost * bump * (weekday < 5)

    if cfg.noise_sd > 0:
        # per-slice stream so adding a slice never perturbs the others
        tag = zlib.crc32(f"{sector.value}/{subsector}".encode())
        rng = np.random.default_rng((cfg.seed, tag))
        jitter = rng.normal(0.0, cfg.noise_sd, HOURS_PER_YEAR)
        # smooth over ~a day to avoid hour-to-hour spikes
        kernel = np.ones(24) / 24.0
        jitter = np.convolve(jitter, kernel, mode="same")
        shape = shape * np.clip(1.0 + jitter, 0.05, None)
    return shape


def synthesize_profiles(
    budget: DemandBudget,
    shapes: ShapeConfig | None = None,
    carrier_split: Mapping[tuple[Sector, str], Mapping[Carrier, float]] | None = None,
) -> list[DemandProfile]:
    """Deterministic hourly profiles whose annual sums hit the budget.

    Each (sector, subsector) slice gets its configured shape, scaled so the
    annual total equals the budget slice, then split across carriers by the
    supplied fractions.
    """
    shapes = shapes or ShapeConfig()
    split = dict(DEFAULT_CARRIER_SPLIT if carrier_split is None else carrier_split)
    profiles = []
    for sector, subs in SUBSECTORS.items():
        for sub in subs:
            shape = _slice_shape(sector, sub, shapes)
            slice_gwh = budget.slice_twh(sector, sub) * 1000.0
            scaled = shape * (slice_gwh / shape.sum())
            fractions = split.get((sector, sub))
            if not fractions:
                raise ConfigError(f"no carrier split for {sector.value}/{sub}")
            if abs(sum(fractions.values()) - 1.0) > 1e-9:
                raise ConfigError(f"carrier split for {sector.value}/{sub} must sum to 1")
            for carrier, fraction in fractions.items():
                profiles.append(
                    DemandProfile(
                        sector, sub, carrier, scaled * fraction,
                        year_label=shapes.year_label,
                    )
                )
    _check_budget(profiles, budget)
    return profiles


def _check_budget(profiles: Sequence[DemandProfile], budget: DemandBudget) -> None:
    total = sum(p.annual_gwh for p in profiles)
    expected = budget.total_twh * 1000.0
    if abs(total - expected) > BUDGET_RTOL * expected:
        raise ConfigError(
            f"synthesized profiles sum to {total:.1f} GWh, budget is {expected:.1f}"
        )


# ---------------------------------------------------------------------------
# CSV ingest / export
# ---------------------------------------------------------------------------

def ingest_profiles(source) -> list[DemandProfile]:
    """Read profiles from CSV with header ``sector,subsector,carrier,hour,value_gwh``.

    Every series must cover hours 0..8759 exactly once.  Malformed rows are
    rejected with their row number (header = row 1).
    """
    if hasattr(source, "read"):
        return _ingest(source)
    with open(source, newline="") as fh:
        return _ingest(fh)


def _ingest(fh) -> list[DemandProfile]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ConfigError("empty CSV") from None
    if [h.strip() for h in header] != CSV_HEADER:
        raise ConfigError(f"row 1: expected header {','.join(CSV_HEADER)}")

    series: dict[tuple[Sector, str, Carrier], np.ndarray] = {}
    seen: dict[tuple[Sector, str, Carrier], np.ndarray] = {}
    for row_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ConfigError(f"row {row_no}: expected 5 fields, got {len(row)}")
        raw_sector, raw_sub, raw_carrier, raw_hour, raw_value = row
        try:
            sector = Sector(raw_sector)
        except ValueError:
            raise ConfigError(f"row {row_no}: unknown sector {raw_sector!r}") from None
        if raw_sub not in SUBSECTORS[sector]:
            raise ConfigError(f"row {row_no}: unknown subsector {raw_sub!r}")
        try:
            carrier = Carrier(raw_carrier)
        except ValueError:
            raise ConfigError(f"row {row_no}: unknown carrier {raw_carrier!r}") from None
        try:
            hour = int(raw_hour)
            value = float(raw_value)
        except ValueError:
            raise ConfigError(f"row {row_no}: malformed hour/value") from None
        if not (0 <= hour < HOURS_PER_YEAR):
            raise ConfigError(
                f"row {row_no}: hour {hour} outside 0..{HOURS_PER_YEAR - 1}"
            )
        if value < 0:
            raise ConfigError(f"row {row_no}: negative value {value}")
        key = (sector, raw_sub, carrier)
        if key not in series:
            series[key] = np.zeros(HOURS_PER_YEAR)
            seen[key] = np.zeros(HOURS_PER_YEAR, dtype=bool)
        if seen[key][hour]:
            raise ConfigError(f"row {row_no}: duplicate hour {hour} for {sector.value}/{raw_sub}/{carrier.value}")
        series[key][hour] = value
        seen[key][hour] = True

    if not series:
        raise ConfigError("CSV contains no data rows")
    profiles = []
    for (sector, sub, carrier), values in series.items():
        missing = int((~seen[(sector, sub, carrier)]).sum())
        if missing:
            raise ConfigError(
                f"series {sector.value}/{sub}/{carrier.value} missing {missing} hour(s)"
            )
        profiles.append(DemandProfile(sector, sub, carrier, values))
    return profiles


def export_profiles(profiles: Iterable[DemandProfile], target) -> None:
    """Write profiles in the ingest CSV format (bit-exact header)."""
    if hasattr(target, "write"):
        _export(profiles, target)
    else:
        with open(target, "w", newline="") as fh:
            _export(profiles, fh)


def _export(profiles: Iterable[DemandProfile], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in profiles:
        for hour, value in enumerate(p.values):
            writer.writerow(
                [p.sector.value, p.subsector, p.carrier.value, hour, repr(float(value))]
            )


def profiles_to_csv(profiles: Iterable[DemandProfile]) -> str:
    buf = io.StringIO()
    _export(profiles, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Reductions, load duration curve, downsampling
# ---------------------------------------------------------------------------

def apply_reduction(
    profiles: Iterable[DemandProfile], reduction_set: ReductionSet
) -> list[DemandProfile]:
    """Scale each profile by (1 - r) of its slice, equally in every hour."""
    out = []
    for p in profiles:
        key = (p.sector, p.subsector)
        if key not in reduction_set.by_subsector:
            raise ConfigError(f"no reduction defined for slice {p.key}")
        r = reduction_set.by_subsector[key]
        if not (0.0 <= r <= 1.0):
            raise ConfigError(f"reduction {r} for {p.key} outside [0, 1]")
        out.append(p.scaled(1.0 - r))
    return out


def load_duration_curve(profile: DemandProfile | np.ndarray) -> np.ndarray:
    """Values sorted descending; element 0 is the peak."""
    values = profile.values if isinstance(profile, DemandProfile) else np.asarray(profile)
    if len(values) == 0:
        raise ConfigError("empty profile")
    return np.sort(values)[::-1].copy()


def step_lengths(n_steps: int) -> np.ndarray:
    """Block lengths in hours for an n-step horizon; sums to 8760 exactly.

    8760 rarely divides evenly, so blocks differ by at most one hour and
    each step carries its own integer length as the timestep weight.
    """
    if not (1 <= n_steps <= HOURS_PER_YEAR):
        raise ConfigError(f"n_steps must be in 1..{HOURS_PER_YEAR}")
    bounds = (np.arange(n_steps + 1) * HOURS_PER_YEAR) // n_steps
    return np.diff(bounds).astype(float)


def downsample_values(values: np.ndarray, n_steps: int) -> np.ndarray:
    """Block means of an 8760-hour series over the ``step_lengths`` blocks.

    Mean values weighted by the block lengths reproduce the original annual
    sum exactly, keep flat series flat, and keep capacity factors in [0,1].
    """
    values = np.asarray(values, dtype=float)
    if len(values) != HOURS_PER_YEAR:
        raise ConfigError(f"can only downsample full-year series, got {len(values)}")
    if not (1 <= n_steps <= HOURS_PER_YEAR):
        raise ConfigError(f"n_steps must be in 1..{HOURS_PER_YEAR}")
    bounds = (np.arange(n_steps + 1) * HOURS_PER_YEAR) // n_steps
    sums = np.add.reduceat(values, bounds[:-1])
    return sums / np.diff(bounds)


def downsample_profiles(
    profiles: Iterable[DemandProfile], n_steps: int
) -> list[DemandProfile]:
    out = []
    for p in profiles:
        if len(p.values) != HOURS_PER_YEAR:
            raise ConfigError(f"{p.key}: already downsampled")
        out.append(
            replace(
                p,
                values=downsample_values(p.values, n_steps),
                step_hours=step_lengths(n_steps),
            )
        )
    return out
