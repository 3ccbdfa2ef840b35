"""Test suite for population apportionment, living space and camp densities.

Run tests:

    pytest test/test_demography.py -v
"""

import dataclasses

import numpy as np
import pytest
from shapely.geometry import box
from shapely.ops import unary_union

from core.errors import DemographyError, GeometryError
from core.schema import Facility
from demography.allocation import (
    Camp,
    PopulationField,
    ShelterSet,
    allocate_population,
    density_per_camp,
    shelter_area_by_camp,
)
from demography.living_space import EMERGENCY_STANDARD_M2, living_space_report, living_space_series
from demography.units import camp_unit_change
from geo.grid import build_grid


def strip_layout(rng: np.random.Generator):
    """Camps as vertical strips with shelters inside and across their borders."""
    n_camps = int(rng.integers(2, 6))
    edges = np.sort(rng.choice(np.arange(50, 950, 10), size=n_camps - 1, replace=False))
    bounds = np.concatenate([[0], edges, [1000]]).astype(float)
    camps, shelters = [], []
    for k in range(n_camps):
        x0, x1 = bounds[k], bounds[k + 1]
        camps.append(
            Camp(
                camp_id=f"C{k}",
                boundary=box(x0, 0, x1, 400),
                pop_total=float(rng.integers(100, 20_000)),
                pop_female=float(rng.integers(50, 10_000)),
                pop_male=float(rng.integers(50, 10_000)),
            )
        )
        cx = (x0 + x1) / 2
        shelters.append(box(cx - 2, 100, cx + 2, 104))
    for _ in range(20):
        x, y = rng.uniform(0, 990), rng.uniform(0, 390)
        w, h = rng.uniform(2, 15, size=2)
        shelters.append(box(x, y, min(x + w, 1000), min(y + h, 400)))
    return camps, ShelterSet(footprints=shelters)


class TestAllocation:
    """Camp totals to grid cells by shelter area."""

    def test_uniform_camp(self, grid_2x2, uniform_camp):
        spec, cells = grid_2x2
        field_ = allocate_population(spec, cells, [uniform_camp], ShelterSet(footprints=[box(0, 0, 100, 100)]))
        np.testing.assert_allclose(field_.total, [250.0] * 4)
        np.testing.assert_allclose(field_.female, [130.0] * 4)
        np.testing.assert_allclose(field_.male, [120.0] * 4)

    def test_mass_preserved(self):
        """Per stream, cell totals sum to camp totals on 100 random layouts."""
        rng = np.random.default_rng(17)
        for _ in range(100):
            camps, shelters = strip_layout(rng)
            aoi = unary_union([c.boundary for c in camps])
            spec, cells = build_grid(aoi, 50.0)
            field_ = allocate_population(spec, cells, camps, shelters)
            for stream in ("total", "female", "male"):
                expected = sum(c.population(stream) for c in camps)
                assert field_.mass(stream) == pytest.approx(expected, rel=1e-9)

    def test_straddling_shelter_split_between_camps(self):
        west = Camp(camp_id="W", boundary=box(0, 0, 50, 50), pop_total=100.0)
        east = Camp(camp_id="E", boundary=box(50, 0, 100, 50), pop_total=300.0)
        shelters = ShelterSet(footprints=[box(40, 10, 60, 20)])
        areas = shelter_area_by_camp([west, east], shelters)
        assert areas == {"W": pytest.approx(100.0), "E": pytest.approx(100.0)}
        spec, cells = build_grid(box(0, 0, 100, 50), 50.0)
        field_ = allocate_population(spec, cells, [west, east], shelters)
        np.testing.assert_allclose(field_.total, [100.0, 300.0])

    def test_density(self, uniform_camp):
        density = density_per_camp(uniform_camp, ShelterSet(footprints=[box(0, 0, 50, 40)]))
        assert density.shelter_area == pytest.approx(2000.0)
        assert density.total == pytest.approx(0.5)

    def test_camp_without_shelter(self, grid_2x2, uniform_camp):
        """The density names the camp; allocation skips it."""
        empty = ShelterSet(footprints=[box(500, 500, 510, 510)])
        with pytest.raises(DemographyError) as exc:
            density_per_camp(uniform_camp, empty)
        assert exc.value.camp_id == "C1"
        spec, cells = grid_2x2
        assert allocate_population(spec, cells, [uniform_camp], empty).mass() == 0.0

    def test_raster_shelters(self, grid_2x2, uniform_camp):
        spec, cells = grid_2x2
        area = {(0, 0): 300.0, (1, 1): 100.0, (5, 5): 999.0}
        field_ = allocate_population(spec, cells, [uniform_camp], ShelterSet(area_by_cell=area))
        np.testing.assert_allclose(field_.total, [750.0, 0.0, 0.0, 250.0])

    def test_more_shelter_never_lowers_a_cell(self):
        """Adding shelter area to one raster cell never lowers its population (100 instances)."""
        rng = np.random.default_rng(19)
        spec, cells = build_grid(box(0, 0, 1000, 400), 100.0)
        for _ in range(100):
            camps, _ = strip_layout(rng)
            area = {cell.key: float(rng.uniform(0.0, 500.0)) for cell in cells}
            before = allocate_population(spec, cells, camps, ShelterSet(area_by_cell=area)).total
            k = int(rng.integers(0, len(cells)))
            area[cells[k].key] += float(rng.uniform(1.0, 2000.0))
            after = allocate_population(spec, cells, camps, ShelterSet(area_by_cell=area)).total
            assert after[k] >= before[k] * (1 - 1e-12)

    def test_streams_scale_independently(self):
        """Tripling every camp's female figure triples female cells and leaves the rest alone."""
        rng = np.random.default_rng(23)
        for _ in range(20):
            camps, shelters = strip_layout(rng)
            spec, cells = build_grid(unary_union([c.boundary for c in camps]), 50.0)
            tripled = [dataclasses.replace(c, pop_female=3 * c.pop_female) for c in camps]
            base = allocate_population(spec, cells, camps, shelters)
            scaled = allocate_population(spec, cells, tripled, shelters)
            np.testing.assert_allclose(scaled.female, 3 * base.female, rtol=1e-12)
            np.testing.assert_array_equal(scaled.male, base.male)
            np.testing.assert_array_equal(scaled.total, base.total)

    def test_negative_population_rejected(self):
        with pytest.raises(DemographyError):
            Camp(camp_id="X", boundary=box(0, 0, 1, 1), pop_total=-5.0)

    def test_degenerate_shelter_rejected(self):
        with pytest.raises(GeometryError):
            ShelterSet(footprints=[box(0, 0, 0, 10)])

    def test_field_shape_checked(self, grid_2x2):
        spec, cells = grid_2x2
        with pytest.raises(DemographyError):
            PopulationField(spec=spec, cells=cells, total=np.zeros(3), female=np.zeros(4), male=np.zeros(4))


class TestLivingSpace:
    """Shelter area per person over epochs."""

    def test_series(self):
        series = living_space_series({"2025": 7.33e6, "2017": 4.2e6}, {"2017": 1.0e6, "2025": 1.0e6})
        assert list(series) == ["2017", "2025"]
        assert series["2025"] == pytest.approx(7.33)

    def test_report_flags_standard(self):
        rows = living_space_report({"a": 3.0e6, "b": 4.0e6}, {"a": 1.0e6, "b": 1.0e6})
        assert [r.below_standard for r in rows] == [True, False]
        assert EMERGENCY_STANDARD_M2 == 3.5

    def test_missing_population(self):
        with pytest.raises(DemographyError):
            living_space_series({"2025": 1.0}, {})
        with pytest.raises(DemographyError):
            living_space_series({"2025": 1.0}, {"2025": 0.0})


class TestCampUnits:
    """Camp-level densities between two epochs."""

    def test_change(self):
        before = [Camp(camp_id="A", boundary=box(0, 0, 1000, 1000), pop_total=10_000.0)]
        after = [Camp(camp_id="A", boundary=box(0, 0, 1000, 1000), pop_total=12_000.0)]
        units_a = [Facility(facility_id="1", x=10, y=10, kind="latrine", capacity=5)]
        units_b = units_a + [Facility(facility_id="2", x=5000, y=5000, kind="latrine", capacity=9)]
        (row,) = camp_unit_change(before, after, units_a, units_b)
        assert row.area_km2 == pytest.approx(1.0)
        assert row.population_density_change == pytest.approx(2000.0)
        assert row.facility_density_change == 0.0

    def test_unmatched_camp_skipped(self):
        before = [Camp(camp_id="A", boundary=box(0, 0, 10, 10), pop_total=1.0)]
        assert camp_unit_change(before, [], [], []) == []
