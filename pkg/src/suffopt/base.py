"""Shared enums and registries used across the package.

Everything downstream (demand slices, carrier assignment, scenario masks)
keys off the sector/subsector registry defined here, so sector and
subsector names appear in exactly one place.
"""
from __future__ import annotations

from enum import Enum

HOURS_PER_YEAR = 8760


class Sector(str, Enum):
    HEAT = "heat"
    MOBILITY = "mobility"
    ELECTRICITY = "electricity"


class Carrier(str, Enum):
    ELECTRICITY = "electricity"
    HYDROGEN = "hydrogen"
    SYNTHETIC_GAS = "synthetic_gas"


class Ambition(str, Enum):
    LOW = "low"
    HIGH = "high"


# Demand slices: every (sector, subsector) pair the toolkit knows about.
SUBSECTORS: dict[Sector, tuple[str, ...]] = {
    Sector.HEAT: (
        "residential_commercial",
        "process_low",
        "process_mid",
        "process_high",
    ),
    Sector.MOBILITY: ("air", "road", "rail"),
    Sector.ELECTRICITY: ("residential", "commercial", "industrial"),
}

# Which final-energy carrier serves each slice, with split fractions.
# Residential/commercial heat and road/rail run on electricity, aviation on
# hydrogen.  Process-heat splits across carriers are configurable defaults,
# not literature values.
DEFAULT_CARRIER_SPLIT: dict[tuple[Sector, str], dict[Carrier, float]] = {
    (Sector.HEAT, "residential_commercial"): {Carrier.ELECTRICITY: 1.0},
    (Sector.HEAT, "process_low"): {Carrier.HYDROGEN: 0.5, Carrier.ELECTRICITY: 0.5},
    (Sector.HEAT, "process_mid"): {Carrier.SYNTHETIC_GAS: 0.6, Carrier.ELECTRICITY: 0.4},
    (Sector.HEAT, "process_high"): {Carrier.SYNTHETIC_GAS: 1.0},
    (Sector.MOBILITY, "air"): {Carrier.HYDROGEN: 1.0},
    (Sector.MOBILITY, "road"): {Carrier.ELECTRICITY: 1.0},
    (Sector.MOBILITY, "rail"): {Carrier.ELECTRICITY: 1.0},
    (Sector.ELECTRICITY, "residential"): {Carrier.ELECTRICITY: 1.0},
    (Sector.ELECTRICITY, "commercial"): {Carrier.ELECTRICITY: 1.0},
    (Sector.ELECTRICITY, "industrial"): {Carrier.ELECTRICITY: 1.0},
}


class ConfigError(ValueError):
    """Invalid catalog, system, or study configuration."""
