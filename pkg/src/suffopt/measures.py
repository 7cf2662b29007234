"""Sufficiency-measure catalog and share-weighted reduction arithmetic.

The catalog couples three layers of data:

* a list of literature measures, each with a low/high reduction range and
  the fraction of its subsector demand it touches,
* per-sector demand share tables (subsector shares within a sector, sector
  shares of total final energy),
* pinned subsector reduction totals per ambition level.

The pinned values are authoritative for scenario arithmetic: they come from
published aggregation work whose exact composition rule is not restated
here.  ``combine_measures`` is the documented utility for composing
user-defined catalogs and uses a multiplicative no-double-counting rule,
which is a stand-in, not a reconstruction of how the pinned totals were
produced.

All fractions are dimensionless decimals; percent appears only at I/O
boundaries.
"""
from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .base import Ambition, ConfigError, Sector, SUBSECTORS

SHARE_SUM_TOL = 1e-9
# The printed mid-temperature branch row overshoots 1.0 by 1e-4, so branch
# tables get a looser gate than the share tables.
BRANCH_SUM_TOL = 2e-3


@dataclass(frozen=True)
class Measure:
    """One literature-sourced sufficiency action.

    ``reduction_low``/``reduction_high`` give the ambition range as a
    fraction of the demand the measure touches; ``applicability`` is the
    fraction of the subsector demand it touches at all.
    """

    id: str
    sector: Sector
    subsector: str
    reduction_low: float
    reduction_high: float
    applicability: float = 1.0
    source_tag: str = ""

    def __post_init__(self) -> None:
        if not (0.0 <= self.reduction_low <= self.reduction_high <= 1.0):
            raise ConfigError(
                f"measure {self.id!r}: need 0 <= low <= high <= 1, "
                f"got ({self.reduction_low}, {self.reduction_high})"
            )
        if not (0.0 < self.applicability <= 1.0):
            raise ConfigError(
                f"measure {self.id!r}: applicability must be in (0, 1], "
                f"got {self.applicability}"
            )
        if self.subsector not in SUBSECTORS[self.sector]:
            raise ConfigError(
                f"measure {self.id!r}: unknown subsector {self.subsector!r} "
                f"for sector {self.sector.value}"
            )

    def reduction(self, ambition: Ambition) -> float:
        return self.reduction_low if ambition is Ambition.LOW else self.reduction_high


@dataclass(frozen=True)
class SubsectorShares:
    """Shares of one sector's demand by subsector; must sum to 1."""

    sector: Sector
    entries: dict[str, float]

    def __post_init__(self) -> None:
        _check_shares(self.entries, f"subsector shares for {self.sector.value}")

    def __getitem__(self, subsector: str) -> float:
        return self.entries[subsector]


@dataclass(frozen=True)
class SectorShares:
    """Shares of total final energy by sector; must sum to 1."""

    entries: dict[Sector, float]

    def __post_init__(self) -> None:
        _check_shares(self.entries, "sector shares")

    def __getitem__(self, sector: Sector) -> float:
        return self.entries[sector]


def _check_shares(entries: Mapping, label: str) -> None:
    if not entries:
        raise ConfigError(f"{label}: empty share table")
    total = sum(entries.values())
    if abs(total - 1.0) > SHARE_SUM_TOL:
        raise ConfigError(f"{label}: shares sum to {total!r}, expected 1.0")
    for key, value in entries.items():
        if not (0.0 < value <= 1.0):
            raise ConfigError(f"{label}: share {key!r} = {value} outside (0, 1]")


@dataclass(frozen=True)
class ProcessHeatDetail:
    """Industry-branch resolution of process heat.

    ``temperature_shares`` are fractions of *total heat demand* held by the
    low/mid/high temperature levels (their sum is the process-heat share of
    heat).  ``branch_shares`` splits each level across industry branches and
    each row must sum to 1.  ``branch_reductions`` holds per-branch demand
    reductions for each ambition.
    """

    temperature_shares: dict[str, float]
    branch_shares: dict[str, dict[str, float]]
    branch_reductions: dict[Ambition, dict[str, dict[str, float]]]

    def __post_init__(self) -> None:
        for level, row in self.branch_shares.items():
            total = sum(row.values())
            if abs(total - 1.0) > BRANCH_SUM_TOL:
                raise ConfigError(
                    f"process-heat branch shares for {level!r} sum to {total!r}"
                )

    @property
    def process_share_of_heat(self) -> float:
        return sum(self.temperature_shares.values())

    def level_reductions(self, ambition: Ambition) -> dict[str, float]:
        """Share-weighted reduction of each temperature level."""
        reductions = self.branch_reductions[ambition]
        out = {}
        for level, row in self.branch_shares.items():
            out[level] = sum(
                share * reductions[level].get(branch, 0.0)
                for branch, share in row.items()
            )
        return out


# ---------------------------------------------------------------------------
# Aggregation operations
# ---------------------------------------------------------------------------

def combine_measures(measures: Iterable[Measure], ambition: Ambition) -> float:
    """Compose measures within one subsector into a single reduction.

    Uses 1 - prod(1 - r_i * a_i): each measure removes its slice from what
    the previous ones left, so overlaps are never double counted.  Order
    invariant, never exceeds 1.  Pinned catalog values take precedence over
    this rule where both exist.
    """
    measures = list(measures)
    if not measures:
        return 0.0
    keys = {(m.sector, m.subsector) for m in measures}
    if len(keys) > 1:
        raise ConfigError(
            "combine_measures needs a single subsector, got "
            + ", ".join(sorted(f"{s.value}/{sub}" for s, sub in keys))
        )
    remaining = 1.0
    for m in measures:
        remaining *= 1.0 - m.reduction(ambition) * m.applicability
    return 1.0 - remaining


def sector_reduction(
    sub_reductions: Mapping[str, float], shares: SubsectorShares
) -> float:
    """Share-weighted mean of subsector reductions over one sector."""
    missing = set(shares.entries) - set(sub_reductions)
    if missing:
        raise ConfigError(
            f"missing reduction for subsector(s): {', '.join(sorted(missing))}"
        )
    return sum(share * sub_reductions[sub] for sub, share in shares.entries.items())


def process_heat_reduction(
    branch_shares: Mapping[str, Mapping[str, float]],
    branch_reductions: Mapping[str, Mapping[str, float]],
    temperature_shares: Mapping[str, float],
) -> float:
    """Reduction of process-heat demand from branch-level data.

    Each temperature level is reduced by the branch-share-weighted mean of
    its branch reductions; levels are then weighted by their share of total
    heat and normalized by the process-heat share (the sum of the
    temperature shares), yielding a fraction of process-heat demand.
    """
    process_share = sum(temperature_shares.values())
    if process_share <= 0:
        raise ConfigError("temperature shares must sum to a positive fraction")
    weighted = 0.0
    for level, row in branch_shares.items():
        total = sum(row.values())
        if abs(total - 1.0) > BRANCH_SUM_TOL:
            raise ConfigError(f"branch shares for {level!r} sum to {total!r}")
        level_red = sum(
            share * branch_reductions[level].get(branch, 0.0)
            for branch, share in row.items()
        )
        weighted += temperature_shares[level] * level_red
    return weighted / process_share


def total_reduction(
    sector_reductions: Mapping[Sector, float], shares: SectorShares
) -> float:
    """Sector-share-weighted mean across sectors."""
    missing = set(shares.entries) - set(sector_reductions)
    if missing:
        raise ConfigError(
            "missing reduction for sector(s): "
            + ", ".join(sorted(s.value for s in missing))
        )
    return sum(share * sector_reductions[s] for s, share in shares.entries.items())


# ---------------------------------------------------------------------------
# Reduction sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionSet:
    """Per-subsector reduction fractions with derived sector/total values.

    Sector values are always the share-weighted mean of the subsector
    values and the total the sector-share-weighted mean of the sector
    values, so masked or uniform sets stay internally consistent.
    """

    by_subsector: dict[tuple[Sector, str], float]
    by_sector: dict[Sector, float]
    total: float
    ambition: Ambition | None = None

    @classmethod
    def build(
        cls,
        subsector_values: Mapping[tuple[Sector, str], float],
        subsector_shares: Mapping[Sector, SubsectorShares],
        sector_shares: SectorShares,
        ambition: Ambition | None = None,
    ) -> "ReductionSet":
        for key, value in subsector_values.items():
            if not (0.0 <= value <= 1.0):
                raise ConfigError(f"reduction for {key} = {value} outside [0, 1]")
        # Slices not named are held at zero, explicitly, so downstream users
        # can treat a missing key as an unknown slice rather than "no change".
        values = {
            (sector, sub): 0.0
            for sector, shares in subsector_shares.items()
            for sub in shares.entries
        }
        values.update(subsector_values)
        by_sector = {}
        for sector, shares in subsector_shares.items():
            subs = {sub: values[(sector, sub)] for sub in shares.entries}
            by_sector[sector] = sector_reduction(subs, shares)
        total = total_reduction(by_sector, sector_shares)
        return cls(values, by_sector, total, ambition)

    def fraction_for(self, sector: Sector, subsector: str) -> float:
        return self.by_subsector.get((sector, subsector), 0.0)


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Catalog:
    """Immutable bundle of measures, share tables and pinned reductions."""

    sector_shares: SectorShares
    subsector_shares: dict[Sector, SubsectorShares]
    pinned: dict[Ambition, dict[tuple[Sector, str], float]]
    process_heat: ProcessHeatDetail
    measures: tuple[Measure, ...] = ()

    def __post_init__(self) -> None:
        for ambition, values in self.pinned.items():
            for (sector, sub), value in values.items():
                if sub not in self.subsector_shares[sector].entries:
                    raise ConfigError(
                        f"pinned {ambition.value} reduction names unknown "
                        f"subsector {sector.value}/{sub}"
                    )
                if not (0.0 <= value <= 1.0):
                    raise ConfigError(
                        f"pinned reduction {sector.value}/{sub} = {value}"
                    )

    def subsector_reduction(
        self, sector: Sector, subsector: str, ambition: Ambition
    ) -> float:
        """Pinned value if present, else composed from catalog measures."""
        pinned = self.pinned[ambition]
        if (sector, subsector) in pinned:
            return pinned[(sector, subsector)]
        relevant = [
            m for m in self.measures
            if m.sector is sector and m.subsector == subsector
        ]
        return combine_measures(relevant, ambition)

    def sector_value(self, sector: Sector, ambition: Ambition) -> float:
        subs = {
            sub: self.subsector_reduction(sector, sub, ambition)
            for sub in self.subsector_shares[sector].entries
        }
        return sector_reduction(subs, self.subsector_shares[sector])

    def process_heat_value(self, ambition: Ambition) -> float:
        """Process-heat reduction via the branch-resolved chain."""
        ph = self.process_heat
        return process_heat_reduction(
            ph.branch_shares,
            ph.branch_reductions[ambition],
            ph.temperature_shares,
        )

    def process_heat_pinned(self, ambition: Ambition) -> float:
        """Process-heat reduction from the pinned temperature-level values."""
        ph = self.process_heat
        levels = {
            "low": self.pinned[ambition][(Sector.HEAT, "process_low")],
            "mid": self.pinned[ambition][(Sector.HEAT, "process_mid")],
            "high": self.pinned[ambition][(Sector.HEAT, "process_high")],
        }
        weighted = sum(ph.temperature_shares[lv] * levels[lv] for lv in levels)
        return weighted / ph.process_share_of_heat

    def reduction_set(
        self,
        ambition: Ambition,
        include: Iterable[tuple[Sector, str]] | None = None,
    ) -> ReductionSet:
        """Full or masked reduction set at one ambition level.

        ``include`` restricts the nonzero entries to the given
        (sector, subsector) pairs; everything else is held at zero.
        """
        keep = None if include is None else set(include)
        values = {}
        for sector, shares in self.subsector_shares.items():
            for sub in shares.entries:
                masked = keep is not None and (sector, sub) not in keep
                values[(sector, sub)] = (
                    0.0 if masked
                    else self.subsector_reduction(sector, sub, ambition)
                )
        return ReductionSet.build(
            values, self.subsector_shares, self.sector_shares, ambition
        )

    def uniform_reduction_set(self, r: float) -> ReductionSet:
        """Every subsector reduced by the same fraction ``r``."""
        values = {
            (sector, sub): r
            for sector, shares in self.subsector_shares.items()
            for sub in shares.entries
        }
        return ReductionSet.build(values, self.subsector_shares, self.sector_shares)


# ---------------------------------------------------------------------------
# Default data
# ---------------------------------------------------------------------------

_SECTOR_SHARES = {
    Sector.HEAT: 0.540,
    # Mobility and electricity shares follow from requiring the pinned
    # sector reductions to reproduce the published 9.4% / 20.5% totals;
    # tests re-derive them from that 2x2 solve.
    Sector.MOBILITY: 0.254,
    Sector.ELECTRICITY: 0.206,
}

_SUBSECTOR_SHARES = {
    Sector.HEAT: {
        "residential_commercial": 0.209,
        "process_low": 0.097,
        "process_mid": 0.478,
        "process_high": 0.216,
    },
    Sector.MOBILITY: {"air": 0.71, "road": 0.19, "rail": 0.10},
    Sector.ELECTRICITY: {
        "residential": 0.253,
        "commercial": 0.289,
        "industrial": 0.458,
    },
}

# Pinned subsector reductions (fraction of the subsector's demand).
_PINNED = {
    Ambition.LOW: {
        (Sector.HEAT, "residential_commercial"): 0.050,
        (Sector.HEAT, "process_low"): 0.086,
        (Sector.HEAT, "process_mid"): 0.051,
        (Sector.HEAT, "process_high"): 0.030,
        (Sector.MOBILITY, "air"): 0.216,
        (Sector.MOBILITY, "road"): 0.177,
        (Sector.MOBILITY, "rail"): 0.302,
        (Sector.ELECTRICITY, "residential"): 0.040,
        (Sector.ELECTRICITY, "commercial"): 0.055,
        (Sector.ELECTRICITY, "industrial"): 0.070,
    },
    Ambition.HIGH: {
        (Sector.HEAT, "residential_commercial"): 0.342,
        (Sector.HEAT, "process_low"): 0.132,
        (Sector.HEAT, "process_mid"): 0.120,
        (Sector.HEAT, "process_high"): 0.076,
        (Sector.MOBILITY, "air"): 0.319,
        (Sector.MOBILITY, "road"): 0.213,
        (Sector.MOBILITY, "rail"): 0.419,
        (Sector.ELECTRICITY, "residential"): 0.200,
        (Sector.ELECTRICITY, "commercial"): 0.234,
        (Sector.ELECTRICITY, "industrial"): 0.175,
    },
}

_TEMPERATURE_SHARES = {"low": 0.097, "mid": 0.478, "high": 0.216}

_BRANCH_SHARES = {
    "low": {"food": 0.49, "paper": 0.51},
    "mid": {
        "chemical": 0.413,
        "engineering_manufacturing": 0.206,
        "refineries": 0.124,
        "other": 0.123,
        "non_metallic_minerals": 0.1341,
    },
    "high": {"iron_steel": 0.859, "non_ferrous_metals": 0.141},
}

# Branch reductions: food waste (17.5% / 27% of food-industry demand),
# product lifetime (14.8%) vs. sharing economy (40%) for engineering,
# plastic recycling and construction modal shift entered as their published
# level-wide contributions divided by the branch share.
_BRANCH_REDUCTIONS = {
    Ambition.LOW: {
        "low": {"food": 0.175, "paper": 0.0},
        "mid": {
            "chemical": 0.014 / 0.413,
            "engineering_manufacturing": 0.148,
            "refineries": 0.0,
            "other": 0.0,
            "non_metallic_minerals": 0.007 / 0.1341,
        },
        "high": {"iron_steel": 0.030 / 0.859, "non_ferrous_metals": 0.0},
    },
    Ambition.HIGH: {
        "low": {"food": 0.27, "paper": 0.0},
        "mid": {
            "chemical": 0.021 / 0.413,
            "engineering_manufacturing": 0.40,
            "refineries": 0.0,
            "other": 0.0,
            "non_metallic_minerals": 0.017 / 0.1341,
        },
        "high": {"iron_steel": 0.076 / 0.859, "non_ferrous_metals": 0.0},
    },
}

# Literature measures.  Value ranges are the published reduction ranges for
# the demand each measure touches; applicability fractions below 1 reflect
# the touched slice (e.g. business travel as a share of car transport) and
# are assumptions where the literature gives none.
_MEASURES = (
    Measure("thermostat_1c", Sector.HEAT, "residential_commercial", 0.044, 0.13,
            1.0, "building-stock and simulation studies"),
    Measure("living_space", Sector.HEAT, "residential_commercial", 0.249, 0.357,
            1.0, "floor-space sufficiency analysis"),
    Measure("shower_heads", Sector.HEAT, "residential_commercial", 0.50, 0.50,
            0.10, "hot-water behaviour studies"),
    Measure("shorter_showers", Sector.HEAT, "residential_commercial", 0.20, 0.30,
            0.10, "hot-water behaviour studies"),
    Measure("food_waste", Sector.HEAT, "process_low", 0.175, 0.27,
            0.49, "food-waste and diet assessments"),
    Measure("plastic_recycling", Sector.HEAT, "process_mid", 0.034, 0.051,
            0.413, "recycling-rate statistics"),
    Measure("product_lifetime", Sector.HEAT, "process_mid", 0.148, 0.40,
            0.206, "obsolescence and sharing-economy studies"),
    Measure("construction_shift_mid", Sector.HEAT, "process_mid", 0.052, 0.127,
            0.1341, "construction-material substitution study"),
    Measure("construction_shift_high", Sector.HEAT, "process_high", 0.035, 0.088,
            0.859, "construction-material substitution study"),
    Measure("modal_shift_cycling", Sector.MOBILITY, "road", 0.035, 0.10,
            1.0, "modal-shift assessments"),
    Measure("telemeetings_car", Sector.MOBILITY, "road", 0.40, 0.60,
            0.19, "business-travel statistics"),
    Measure("teleworking_car", Sector.MOBILITY, "road", 0.01, 0.20,
            0.18, "commuting statistics"),
    Measure("smaller_cars", Sector.MOBILITY, "road", 0.075, 0.075,
            1.0, "vehicle-size regulation study"),
    Measure("efficient_driving", Sector.MOBILITY, "road", 0.05, 0.05,
            1.0, "eco-driving trials"),
    Measure("modal_shift_rail", Sector.MOBILITY, "rail", 0.03, 0.03,
            1.0, "modal-shift assessments"),
    Measure("teleworking_rail", Sector.MOBILITY, "rail", 0.20, 0.20,
            0.21, "commuting statistics"),
    Measure("telemeetings_rail", Sector.MOBILITY, "rail", 0.40, 0.60,
            0.11, "business-travel statistics"),
    Measure("rail_freight_optimization", Sector.MOBILITY, "rail", 0.14, 0.30,
            0.50, "freight scheduling studies"),
    Measure("passenger_flight_decline", Sector.MOBILITY, "air", 0.54, 0.54,
            0.78, "post-2020 aviation statistics"),
    Measure("air_freight_shift", Sector.MOBILITY, "air", 0.20, 0.30,
            0.22, "cargo statistics"),
    Measure("direct_feedback", Sector.ELECTRICITY, "residential", 0.05, 0.15,
            1.0, "smart-meter feedback trials"),
    Measure("goal_setting", Sector.ELECTRICITY, "residential", 0.045, 0.151,
            1.0, "goal-setting trials"),
    Measure("behaviour_lineup", Sector.ELECTRICITY, "residential", 0.15, 0.20,
            1.0, "national sufficiency assessments"),
    Measure("group_feedback", Sector.ELECTRICITY, "commercial", 0.055, 0.129,
            1.0, "workplace feedback programmes"),
    Measure("community_marketing", Sector.ELECTRICITY, "commercial", 0.12, 0.12,
            1.0, "community-based social marketing"),
    Measure("working_time", Sector.ELECTRICITY, "commercial", 0.105, 0.105,
            1.0, "working-time experiment"),
    Measure("energy_audits", Sector.ELECTRICITY, "industrial", 0.07, 0.20,
            1.0, "industrial audit programmes"),
    Measure("industrial_marketing", Sector.ELECTRICITY, "industrial", 0.12, 0.12,
            1.0, "community-based social marketing"),
)


def default_catalog() -> Catalog:
    """Catalog with the published share tables and pinned reductions."""
    return Catalog(
        sector_shares=SectorShares(dict(_SECTOR_SHARES)),
        subsector_shares={
            sector: SubsectorShares(sector, dict(entries))
            for sector, entries in _SUBSECTOR_SHARES.items()
        },
        pinned={amb: dict(vals) for amb, vals in _PINNED.items()},
        process_heat=ProcessHeatDetail(
            dict(_TEMPERATURE_SHARES),
            {lv: dict(row) for lv, row in _BRANCH_SHARES.items()},
            {
                amb: {lv: dict(row) for lv, row in levels.items()}
                for amb, levels in _BRANCH_REDUCTIONS.items()
            },
        ),
        measures=_MEASURES,
    )


# ---------------------------------------------------------------------------
# JSON catalog files (schema documented in docs/catalog_format.md)
# ---------------------------------------------------------------------------

def catalog_to_dict(catalog: Catalog) -> dict:
    return {
        "sector_shares": {s.value: v for s, v in catalog.sector_shares.entries.items()},
        "subsector_shares": {
            s.value: dict(t.entries) for s, t in catalog.subsector_shares.items()
        },
        "pinned_reductions": {
            amb.value: {
                f"{sector.value}/{sub}": value
                for (sector, sub), value in vals.items()
            }
            for amb, vals in catalog.pinned.items()
        },
        "process_heat": {
            "temperature_shares": dict(catalog.process_heat.temperature_shares),
            "branch_shares": {
                lv: dict(row) for lv, row in catalog.process_heat.branch_shares.items()
            },
            "branch_reductions": {
                amb.value: {lv: dict(row) for lv, row in levels.items()}
                for amb, levels in catalog.process_heat.branch_reductions.items()
            },
        },
        "measures": [
            {
                "id": m.id,
                "sector": m.sector.value,
                "subsector": m.subsector,
                "reduction_low": m.reduction_low,
                "reduction_high": m.reduction_high,
                "applicability": m.applicability,
                "source_tag": m.source_tag,
            }
            for m in catalog.measures
        ],
    }


def catalog_from_dict(data: Mapping) -> Catalog:
    try:
        sector_shares = SectorShares(
            {Sector(s): v for s, v in data["sector_shares"].items()}
        )
        subsector_shares = {
            Sector(s): SubsectorShares(Sector(s), dict(entries))
            for s, entries in data["subsector_shares"].items()
        }
        pinned = {}
        for amb, vals in data["pinned_reductions"].items():
            table = {}
            for key, value in vals.items():
                sector_name, _, sub = key.partition("/")
                table[(Sector(sector_name), sub)] = value
            pinned[Ambition(amb)] = table
        ph = data["process_heat"]
        process_heat = ProcessHeatDetail(
            dict(ph["temperature_shares"]),
            {lv: dict(row) for lv, row in ph["branch_shares"].items()},
            {
                Ambition(amb): {lv: dict(row) for lv, row in levels.items()}
                for amb, levels in ph["branch_reductions"].items()
            },
        )
        measures = tuple(
            Measure(
                id=m["id"],
                sector=Sector(m["sector"]),
                subsector=m["subsector"],
                reduction_low=m["reduction_low"],
                reduction_high=m["reduction_high"],
                applicability=m.get("applicability", 1.0),
                source_tag=m.get("source_tag", ""),
            )
            for m in data.get("measures", [])
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed catalog: {exc}") from exc
    return Catalog(sector_shares, subsector_shares, pinned, process_heat, measures)


def load_catalog(path: str | Path) -> Catalog:
    with open(path) as fh:
        return catalog_from_dict(json.load(fh))


def save_catalog(catalog: Catalog, path: str | Path) -> None:
    Path(path).write_text(json.dumps(catalog_to_dict(catalog), indent=2) + "\n")
