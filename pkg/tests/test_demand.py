"""Demand profiles: synthesis, ingest validation, reductions, duration curves."""
import io

import numpy as np
import pytest

from suffopt.base import Ambition, Carrier, ConfigError, HOURS_PER_YEAR, Sector
from suffopt.demand import (
    DemandBudget,
    DemandProfile,
    ShapeConfig,
    apply_reduction,
    downsample_profiles,
    downsample_values,
    export_profiles,
    ingest_profiles,
    load_duration_curve,
    profiles_to_csv,
    step_lengths,
    synthesize_profiles,
)
from suffopt.measures import default_catalog

CATALOG = default_catalog()


@pytest.fixture(scope="module")
def budget():
    return DemandBudget(1465.0, CATALOG)


@pytest.fixture(scope="module")
def reference(budget):
    return synthesize_profiles(budget, ShapeConfig(seed=1))


# -- synthesis ----------------------------------------------------------------

def test_total_budget_hit(reference):
    total = sum(p.annual_gwh for p in reference)
    assert total == pytest.approx(1_465_000.0, rel=1e-3)


def test_flat_shape_is_uniform(budget):
    profiles = synthesize_profiles(budget, ShapeConfig(flat=True))
    by_slice = {}
    for p in profiles:
        by_slice.setdefault((p.sector, p.subsector), np.zeros(HOURS_PER_YEAR))
        by_slice[(p.sector, p.subsector)] += p.values
    for (sector, sub), values in by_slice.items():
        expected = budget.slice_twh(sector, sub) * 1000.0 / HOURS_PER_YEAR
        assert np.allclose(values, expected, rtol=1e-12), (sector, sub)


def test_synthesis_deterministic(budget):
    cfg = ShapeConfig(seed=9, noise_sd=0.05)
    a = synthesize_profiles(budget, cfg)
    b = synthesize_profiles(budget, cfg)
    assert len(a) == len(b)
    for pa, pb in zip(a, b):
        assert pa.key == pb.key
        assert np.array_equal(pa.values, pb.values)


def test_nonpositive_budget_rejected():
    with pytest.raises(ConfigError, match="positive"):
        DemandBudget(0.0, CATALOG)


def test_profiles_nonnegative_and_full_length(reference):
    for p in reference:
        assert len(p.values) == HOURS_PER_YEAR
        assert (p.values >= 0).all()


def test_slice_budgets_respected(reference, budget):
    totals = {}
    for p in reference:
        totals[(p.sector, p.subsector)] = totals.get((p.sector, p.subsector), 0.0) + p.annual_gwh
    for (sector, sub), gwh in totals.items():
        assert gwh == pytest.approx(budget.slice_twh(sector, sub) * 1000.0, rel=1e-3)


# -- CSV ingest / export ------------------------------------------------------

def _flat_csv(value="2.5", hours=HOURS_PER_YEAR):
    lines = ["sector,subsector,carrier,hour,value_gwh"]
    lines += [f"mobility,road,electricity,{h},{value}" for h in range(hours)]
    return "\n".join(lines) + "\n"


def test_ingest_flat_series():
    profiles = ingest_profiles(io.StringIO(_flat_csv()))
    assert len(profiles) == 1
    p = profiles[0]
    assert p.sector is Sector.MOBILITY and p.carrier is Carrier.ELECTRICITY
    assert p.annual_gwh == pytest.approx(HOURS_PER_YEAR * 2.5)


def test_ingest_rejects_out_of_range_hour():
    text = _flat_csv(hours=HOURS_PER_YEAR - 1)
    text += "mobility,road,electricity,8761,2.5\n"
    with pytest.raises(ConfigError, match=r"row 8761.*hour 8761"):
        ingest_profiles(io.StringIO(text))


def test_ingest_rejects_duplicate_hour():
    text = _flat_csv() + "mobility,road,electricity,17,2.5\n"
    with pytest.raises(ConfigError, match="duplicate hour 17"):
        ingest_profiles(io.StringIO(text))


def test_ingest_rejects_unknown_sector():
    text = "sector,subsector,carrier,hour,value_gwh\nagriculture,road,electricity,0,1\n"
    with pytest.raises(ConfigError, match="row 2.*agriculture"):
        ingest_profiles(io.StringIO(text))


def test_ingest_rejects_negative_value():
    text = "sector,subsector,carrier,hour,value_gwh\nmobility,road,electricity,0,-1\n"
    with pytest.raises(ConfigError, match="row 2.*negative"):
        ingest_profiles(io.StringIO(text))


def test_ingest_rejects_missing_hours():
    with pytest.raises(ConfigError, match="missing 1 hour"):
        ingest_profiles(io.StringIO(_flat_csv(hours=HOURS_PER_YEAR - 1)))


def test_ingest_rejects_bad_header():
    with pytest.raises(ConfigError, match="row 1"):
        ingest_profiles(io.StringIO("a,b,c,d,e\n"))


def test_export_ingest_round_trip(reference, tmp_path):
    path = tmp_path / "profiles.csv"
    export_profiles(reference[:3], path)
    back = ingest_profiles(path)
    assert {p.key for p in back} == {p.key for p in reference[:3]}
    by_key = {p.key: p for p in back}
    for p in reference[:3]:
        assert np.array_equal(by_key[p.key].values, p.values)


def test_csv_export_deterministic(reference):
    assert profiles_to_csv(reference[:2]) == profiles_to_csv(reference[:2])


# -- reductions ---------------------------------------------------------------

def test_high_ambition_totals(reference):
    reduced = apply_reduction(reference, CATALOG.reduction_set(Ambition.HIGH))
    total_twh = sum(p.annual_gwh for p in reduced) / 1000.0
    assert total_twh == pytest.approx(1165.0, abs=2.0)


def test_low_ambition_totals(reference):
    reduced = apply_reduction(reference, CATALOG.reduction_set(Ambition.LOW))
    total_twh = sum(p.annual_gwh for p in reduced) / 1000.0
    assert total_twh == pytest.approx(1327.0, abs=2.0)


def test_zero_reduction_is_identity(reference):
    unchanged = apply_reduction(reference, CATALOG.uniform_reduction_set(0.0))
    for before, after in zip(reference, unchanged):
        assert np.array_equal(before.values, after.values)


def test_sector_potentials_high_ambition(reference):
    reduced = apply_reduction(reference, CATALOG.reduction_set(Ambition.HIGH))
    saved = {s: 0.0 for s in Sector}
    for before, after in zip(reference, reduced):
        saved[before.sector] += (before.annual_gwh - after.annual_gwh) / 1000.0
    assert saved[Sector.HEAT] == pytest.approx(125.0, abs=2.0)
    assert saved[Sector.MOBILITY] == pytest.approx(115.0, abs=2.0)
    assert saved[Sector.ELECTRICITY] == pytest.approx(60.0, abs=2.0)


def test_reduction_preserves_shape(reference):
    reduced = apply_reduction(reference, CATALOG.reduction_set(Ambition.HIGH))
    for before, after in zip(reference, reduced):
        if after.annual_gwh == 0.0:
            continue
        norm_before = before.values / before.values.sum()
        norm_after = after.values / after.values.sum()
        assert np.max(np.abs(norm_before - norm_after)) < 1e-12


def test_reduction_scales_annual_total_exactly(reference):
    rs = CATALOG.reduction_set(Ambition.HIGH)
    reduced = apply_reduction(reference, rs)
    for before, after in zip(reference, reduced):
        r = rs.by_subsector[(before.sector, before.subsector)]
        assert after.annual_gwh == pytest.approx(before.annual_gwh * (1 - r), rel=1e-12)


# -- load duration curve ------------------------------------------------------

def test_ldc_sorts_descending():
    p = DemandProfile(Sector.MOBILITY, "road", Carrier.ELECTRICITY, [1.0, 3.0, 2.0])
    assert load_duration_curve(p).tolist() == [3.0, 2.0, 1.0]


def test_ldc_flat_profile_constant():
    p = DemandProfile(Sector.MOBILITY, "road", Carrier.ELECTRICITY, np.full(100, 4.2))
    assert np.array_equal(load_duration_curve(p), np.full(100, 4.2))


def test_ldc_is_permutation():
    rng = np.random.default_rng(3)
    values = rng.uniform(0, 10, 500)
    curve = load_duration_curve(values)
    assert curve.sum() == pytest.approx(values.sum(), rel=1e-12)
    assert np.array_equal(np.sort(curve), np.sort(values))


def test_ldc_commutes_with_scaling():
    # oracle: sorting then scaling equals scaling then sorting
    rng = np.random.default_rng(5)
    for _ in range(20):
        values = rng.uniform(0, 100, 200)
        r = rng.uniform(0, 1)
        direct = load_duration_curve(values * (1 - r))
        scaled = load_duration_curve(values) * (1 - r)
        assert np.allclose(direct, scaled, rtol=1e-12)


def test_ldc_rejects_empty():
    with pytest.raises(ConfigError):
        load_duration_curve(np.array([]))


# -- downsampling -------------------------------------------------------------

def test_downsample_conserves_energy(reference):
    down = downsample_profiles(reference, 336)
    for before, after in zip(reference, down):
        assert len(after.values) == 336
        assert after.annual_gwh == pytest.approx(before.annual_gwh, rel=1e-12)


def test_downsample_flat_stays_flat():
    values = np.full(HOURS_PER_YEAR, 7.0)
    down = downsample_values(values, 336)
    assert np.allclose(down, 7.0, rtol=1e-12)


def test_downsample_stays_in_unit_interval():
    rng = np.random.default_rng(8)
    cf = rng.uniform(0, 1, HOURS_PER_YEAR)
    down = downsample_values(cf, 336)
    assert (down >= 0).all() and (down <= 1).all()
    assert down.mean() == pytest.approx(cf.mean(), abs=5e-3)


def test_step_lengths_cover_year():
    lengths = step_lengths(336)
    assert lengths.sum() == HOURS_PER_YEAR
    assert set(lengths.tolist()) <= {26.0, 27.0}


def test_downsample_rejects_partial_year():
    with pytest.raises(ConfigError):
        downsample_values(np.ones(100), 10)
