"""Test suite for input loading, end-to-end runs and result files.

All layers are small synthetic GeoJSON files written to a temporary
directory. Run tests:

    pytest test/test_pipeline.py -v

The larger performance instance is marked slow:

    pytest test/test_pipeline.py -v -m slow
"""

import json
import time
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from shapely.geometry import LineString, Point, Polygon, box

from accessibility.blocks import Block
from core.errors import DatasetError, GridMismatchError, UndefinedStatisticError
from core.schema import Facility, FacilityKind, RunConfig
from demography.allocation import Camp, ShelterSet
from pipeline.dataset import Dataset, load_dataset, load_facilities, load_shelters
from pipeline.runner import (
    CAMP_UNIT_COLUMNS,
    build_demand,
    build_pedestrian_network,
    facility_snaps,
    network_summary,
    read_survey,
    run_access,
    run_camp_units,
    run_compare,
    run_validate,
)
from pipeline.writers import (
    FIELD_COLUMNS,
    file_tag,
    read_field,
    sig9,
    write_field_csv,
    write_grid_csv,
    write_population_csv,
)

from conftest import feature, write_geojson

CROSS = [[(0, 50), (50, 50), (100, 50)], [(50, 0), (50, 50), (50, 100)]]


def euclidean_cfg(tmp_path: Path, **kw) -> RunConfig:
    return RunConfig(distance_mode="euclidean", kinds=["water_pump"], output_dir=str(tmp_path), **kw)


@pytest.fixture
def layer_files(tmp_path):
    """One camp of 1,000 persons, 40 pumps at its center, a footpath cross and two blocks."""
    d = tmp_path / "data"
    d.mkdir()
    camp = box(0, 0, 100, 100)
    paths = {
        "camps_path": write_geojson(
            d / "camps.geojson",
            [feature(camp, camp_id="C1", pop_total=1000, pop_female=520, pop_male=480)],
        ),
        "facilities_path": write_geojson(
            d / "facilities.geojson",
            [feature(Point(50, 50), facility_id=f"wp-{k}", kind="water_pump") for k in range(39)]
            + [feature(Point(50, 50), facility_id="wp-39", kind="water_pump", count=1)],
        ),
        "shelters_path": write_geojson(d / "shelters.geojson", [feature(camp)]),
        "footpaths_path": write_geojson(d / "footpaths.geojson", [feature(LineString(c)) for c in CROSS]),
        "blocks_path": write_geojson(
            d / "blocks.geojson",
            [
                feature(box(0, 0, 50, 100), block_id="west"),
                feature(box(50, 0, 100, 100), block_id="east"),
                feature(box(500, 500, 600, 600), block_id="empty"),
            ],
        ),
    }
    return paths


class TestDatasetLoading:
    """GeoJSON and CSV layers to validated records."""

    def test_load_all_layers(self, layer_files):
        dataset = load_dataset(RunConfig(**layer_files))
        assert [c.camp_id for c in dataset.camps] == ["C1"]
        assert len(dataset.facilities) == 40
        assert len(dataset.footpaths) == 2
        assert [b.block_id for b in dataset.blocks] == ["west", "east", "empty"]
        assert dataset.aoi.equals(box(0, 0, 100, 100))
        assert not dataset.has_gender_metadata

    def test_layer_subset(self, layer_files):
        dataset = load_dataset(RunConfig(**layer_files), layers=("footpaths",))
        assert dataset.camps == [] and dataset.facilities == []
        with pytest.raises(ValueError):
            load_dataset(RunConfig(**layer_files), layers=("roads",))

    def test_unknown_kind_names_feature(self, tmp_path):
        path = write_geojson(tmp_path / "f.geojson", [feature(Point(0, 0), facility_id="x7", kind="shower")])
        with pytest.raises(DatasetError, match=r"\[facilities #x7\]"):
            load_facilities(path)

    def test_gender_metadata_detected(self, tmp_path):
        path = write_geojson(
            tmp_path / "f.geojson",
            [feature(Point(0, 0), facility_id="1", kind="latrine", gender="female", count=3)],
        )
        facilities, has_gender = load_facilities(path)
        assert has_gender
        assert facilities[0].capacity == 3

    def test_duplicate_facility_id(self, tmp_path):
        path = write_geojson(
            tmp_path / "f.geojson",
            [feature(Point(0, 0), facility_id="1", kind="latrine")] * 2,
        )
        with pytest.raises(DatasetError, match="duplicate"):
            load_facilities(path)

    def test_invalid_camp_polygon(self, tmp_path):
        bowtie = Polygon([(0, 0), (10, 10), (10, 0), (0, 10)])
        path = write_geojson(tmp_path / "c.geojson", [feature(bowtie, camp_id="bad", pop_total=1)])
        with pytest.raises(DatasetError, match=r"\[camps #bad\] invalid polygon"):
            load_dataset(RunConfig(camps_path=path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError, match="file not found"):
            load_facilities(str(tmp_path / "absent.geojson"))

    def test_strict_rejects_outside_facilities(self, layer_files, tmp_path):
        far = write_geojson(tmp_path / "far.geojson", [feature(Point(5000, 5000), facility_id="far", kind="latrine")])
        cfg = RunConfig(**{**layer_files, "facilities_path": far})
        assert len(load_dataset(cfg).facilities) == 1
        with pytest.raises(DatasetError, match="outside every camp"):
            load_dataset(cfg.model_copy(update={"strict": True}))

    def test_population_csv(self, layer_files, tmp_path):
        csv = tmp_path / "pop.csv"
        csv.write_text("camp_id,pop_total,pop_female,pop_male\nC1,2000,1000,1000\n", encoding="utf-8")
        dataset = load_dataset(RunConfig(**layer_files, population_csv_path=str(csv)))
        assert dataset.camps[0].pop_total == 2000.0

    def test_population_csv_bad_value(self, layer_files, tmp_path):
        csv = tmp_path / "pop.csv"
        csv.write_text("camp_id,pop_total\nC1,many\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="line 2"):
            load_dataset(RunConfig(**layer_files, population_csv_path=str(csv)))

    def test_shelter_area_csv(self, tmp_path):
        csv = tmp_path / "shelters.csv"
        csv.write_text("row,col,shelter_area\n0,0,120.5\n1,1,30\n", encoding="utf-8")
        shelters = load_shelters(str(csv))
        assert shelters.is_raster
        assert shelters.area_by_cell == {(0, 0): 120.5, (1, 1): 30.0}

    def test_require(self):
        with pytest.raises(DatasetError, match=r"\[footpaths\]"):
            Dataset().require("footpaths")


class TestAccessRuns:
    """End-to-end accessibility runs."""

    @pytest.mark.parametrize("n, expected_a, expected_ppf", [(40, 0.040, 25.0), (34, 0.034, 29.41)])
    def test_co_located_facilities(self, uniform_dataset, tmp_path, n, expected_a, expected_ppf):
        run = run_access(euclidean_cfg(tmp_path), uniform_dataset(n))
        water = run.summary[0]
        assert water["column"] == "A_water"
        assert water["mean_A"] == pytest.approx(expected_a, rel=1e-9)
        assert water["people_per_facility"] == pytest.approx(expected_ppf, abs=0.01)
        assert run.camps["C1"]["cell_mean"] == pytest.approx(expected_a, rel=1e-9)

    def test_output_files(self, uniform_dataset, tmp_path):
        run = run_access(euclidean_cfg(tmp_path), uniform_dataset(40))
        names = sorted(p.name for p in run.outputs.values())
        assert names == [
            "access_total.csv",
            "access_total.geojson",
            "camps_total.csv",
            "diagnostics_total.json",
            "summary_total.csv",
        ]
        frame = pd.read_csv(tmp_path / "access_total.csv")
        assert list(frame.columns) == FIELD_COLUMNS
        assert frame["A_latrine"].isna().all()
        geo = json.loads((tmp_path / "access_total.geojson").read_text())
        assert geo["properties"]["tag"] == "total"
        assert len(geo["features"]) == 4
        diagnostics = json.loads((tmp_path / "diagnostics_total.json").read_text())
        assert diagnostics["n_pairs"] == 160
        assert diagnostics["inventory"]["water_pump"]["locations"] == 40

    def test_no_output_dir(self, uniform_dataset, tmp_path):
        run = run_access(euclidean_cfg(tmp_path / "unused"), uniform_dataset(3), output_dir="")
        assert run.outputs == {}
        assert not (tmp_path / "unused").exists()

    def test_network_mode_conserves_capacity(self, layer_files, tmp_path):
        """Population-weighted A equals units per person whatever the distances."""
        cfg = RunConfig(**layer_files, kinds=["water_pump"], output_dir=str(tmp_path / "out"))
        run = run_access(cfg, load_dataset(cfg))
        assert run.diagnostics.distance_mode == "network"
        assert run.summary[0]["population_weighted_A"] == pytest.approx(0.040, rel=1e-9)
        assert run.diagnostics.empty_blocks == ["empty"]
        assert (tmp_path / "out" / "blocks_total.csv").exists()

    def test_empty_facility_layer(self, uniform_dataset, tmp_path):
        dataset = uniform_dataset(0)
        run = run_access(RunConfig(distance_mode="euclidean", output_dir=str(tmp_path)), dataset)
        assert np.all(run.access.mean == 0.0)
        assert run.diagnostics.empty_kinds == ["water_pump", "latrine", "bathing_cubicle"]

    def test_female_scenario_file_tag(self, uniform_dataset, tmp_path):
        cfg = euclidean_cfg(tmp_path, scenario={"gender_stream": "female", "allgender_factor": 0.75})
        run = run_access(cfg, uniform_dataset(4, gender="all"))
        assert run.access.tag == "female_0.75"
        assert (tmp_path / "access_female_0.75.csv").exists()

    def test_repeated_runs_are_byte_identical(self, layer_files, tmp_path):
        """Same inputs give the same files, with one worker or several."""
        outputs = []
        for k, workers in enumerate((1, 4)):
            cfg = RunConfig(**layer_files, workers=workers, batch_size=1, output_dir=str(tmp_path / f"run{k}"))
            outputs.append(run_access(cfg, load_dataset(cfg)).outputs)
        for key, path in outputs[0].items():
            assert path.read_bytes() == outputs[1][key].read_bytes(), key


class TestStages:
    """Stage outputs used by the grid, allocate and network commands."""

    def test_demand_requires_layers(self):
        with pytest.raises(DatasetError):
            build_demand(RunConfig(), Dataset())

    def test_stage_files(self, uniform_dataset, tmp_path):
        demand = build_demand(RunConfig(), uniform_dataset(1))
        write_grid_csv(demand.cells, tmp_path / "grid.csv")
        write_population_csv(demand, tmp_path / "population.csv")
        grid = pd.read_csv(tmp_path / "grid.csv")
        assert grid["cell_id"].tolist() == ["0_0", "0_1", "1_0", "1_1"]
        population = pd.read_csv(tmp_path / "population.csv")
        assert population["pop_total"].sum() == pytest.approx(1000.0)

    def test_network_stage(self, layer_files):
        cfg = RunConfig(**layer_files)
        dataset = load_dataset(cfg)
        net = build_pedestrian_network(cfg, dataset)
        summary = network_summary(net)
        assert (summary.n_vertices, summary.n_edges, summary.n_components) == (5, 4, 1)
        assert summary.total_length == pytest.approx(200.0)
        snaps = facility_snaps(net, dataset)
        assert snaps[0]["offset"] == 0.0

    def test_file_tag(self):
        assert file_tag("female_0.75") == "female_0.75"
        assert file_tag("gap a/b") == "gap_a_b"
        assert file_tag("total") == "total"


class TestFieldFiles:
    """Reading written fields back."""

    def test_round_trip(self, uniform_dataset, tmp_path):
        run = run_access(euclidean_cfg(tmp_path / "a"), uniform_dataset(34))
        path = run.outputs["field_csv"]
        back = read_field(path)
        assert back.spec == run.access.spec
        original = run.access.column("A_water")
        np.testing.assert_array_equal(back.column("A_water"), [sig9(v) for v in original])
        np.testing.assert_array_equal(back.population.total, run.access.population.total)
        again = write_field_csv(back, tmp_path / "again.csv")
        assert again.read_bytes() == path.read_bytes()

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("cell_id,row,col\n0_0,0,0\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="missing columns"):
            read_field(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            read_field(tmp_path / "absent.csv")


class TestCompareAndValidate:
    """Epoch change and survey correlation."""

    def test_compare_epochs(self, uniform_dataset, tmp_path):
        a = read_field(run_access(euclidean_cfg(tmp_path / "a"), uniform_dataset(40)).outputs["field_csv"])
        b = read_field(run_access(euclidean_cfg(tmp_path / "b"), uniform_dataset(34)).outputs["field_csv"])
        blocks = [Block("west", box(0, 0, 50, 100))]
        result = run_compare(a, b, blocks, output_dir=tmp_path / "change")
        np.testing.assert_allclose(result.change.column("A_water"), -0.006, rtol=1e-6)
        assert result.blocks[0].delta == pytest.approx(-0.006, rel=1e-6)
        assert (tmp_path / "change" / "change.csv").exists()
        assert (tmp_path / "change" / "blocks_change.csv").exists()

    def test_compare_different_grids(self, uniform_dataset, tmp_path):
        a = run_access(euclidean_cfg(tmp_path), uniform_dataset(4), output_dir="").access
        b = run_access(euclidean_cfg(tmp_path, cell_size=25.0), uniform_dataset(4), output_dir="").access
        with pytest.raises(GridMismatchError):
            run_compare(a, b)

    def test_gender_gap(self, uniform_dataset, tmp_path):
        """40 all-gender pumps counted at 75% for women: the gap is female - male everywhere."""
        dataset = uniform_dataset(40, gender="all")
        female = run_access(
            euclidean_cfg(tmp_path / "f", scenario={"gender_stream": "female", "allgender_factor": 0.75}), dataset
        ).access
        male = run_access(euclidean_cfg(tmp_path / "m", scenario={"gender_stream": "male"}), dataset).access
        blocks = [Block("west", box(0, 0, 50, 100))]
        result = run_compare(female, male, blocks, output_dir=tmp_path / "gap", mode="gender_gap")
        expected = female.column("A_water") - male.column("A_water")
        np.testing.assert_array_equal(result.change.column("A_water"), expected)
        assert result.change.tag == "gender_gap"
        assert result.blocks[0].mean == pytest.approx(float(female.column("A_water").mean()))
        assert result.blocks[0].delta == pytest.approx(float(expected.mean()))
        assert np.all(expected < 0)
        assert sorted(p.name for p in (tmp_path / "gap").iterdir()) == [
            "blocks_gender_gap.csv",
            "gender_gap.csv",
            "gender_gap.geojson",
        ]

    def test_unknown_compare_mode(self, uniform_dataset, tmp_path):
        a = run_access(euclidean_cfg(tmp_path), uniform_dataset(4), output_dir="").access
        with pytest.raises(ValueError, match="Unknown compare mode"):
            run_compare(a, a, mode="ratio")

    def test_camp_units(self, tmp_path):
        camps_a = [
            Camp(camp_id="A", boundary=box(0, 0, 1000, 1000), pop_total=10_000.0),
            Camp(camp_id="B", boundary=box(2000, 0, 2500, 1000), pop_total=500.0),
        ]
        camps_b = [Camp(camp_id="A", boundary=box(0, 0, 1000, 1000), pop_total=12_000.0)]
        units_a = [Facility(facility_id="1", x=10, y=10, kind="latrine", capacity=5)]
        units_b = units_a + [Facility(facility_id="2", x=500, y=500, kind="latrine", capacity=3)]
        run = run_camp_units(camps_a, camps_b, units_a, units_b, output_dir=tmp_path)
        assert [row.camp_id for row in run.rows] == ["A"]
        table = pd.read_csv(run.outputs["camp_units"], dtype={"camp_id": str})
        assert table.columns.tolist() == CAMP_UNIT_COLUMNS
        assert table["population_density_change"].tolist() == [2000.0]
        assert table["facility_density_a"].tolist() == [5.0]
        assert table["facility_density_change"].tolist() == [3.0]

    def test_validate_inverse_survey(self, tmp_path):
        camp_values = {"A": 0.01, "B": 0.04, "C": 0.02, "D": 0.08, "E": None}
        survey = tmp_path / "survey.csv"
        survey.write_text(
            "camp_id,people_per_facility\n" + "".join(f"{k},{1 / v}\n" for k, v in camp_values.items() if v),
            encoding="utf-8",
        )
        result = run_validate(camp_values, survey, output_dir=tmp_path)
        assert result.rho == pytest.approx(-1.0)
        assert result.n_camps == 4
        assert len(pd.read_csv(result.scatter_path)) == 4

    def test_validate_too_few_camps(self):
        with pytest.raises(UndefinedStatisticError):
            run_validate({"A": 0.1, "B": 0.2}, {"A": 10.0, "B": 5.0})

    def test_survey_bad_value(self, tmp_path):
        survey = tmp_path / "survey.csv"
        survey.write_text("camp_id,people_per_facility\nA,12\nB,lots\n", encoding="utf-8")
        with pytest.raises(DatasetError, match="line 3"):
            read_survey(survey)


def lattice_dataset(size: float, n_ticks: int, n_facilities: int, seed: int) -> Dataset:
    """A square camp with a footpath lattice and facilities of cycling kinds at random points."""
    ticks = np.linspace(0.0, size, n_ticks)
    # Every line carries a vertex at each crossing so the lattice is connected
    footpaths = [LineString([(t, s) for s in ticks]) for t in ticks] + [
        LineString([(s, t) for s in ticks]) for t in ticks
    ]
    rng = np.random.default_rng(seed)
    kinds = list(FacilityKind)
    facilities = [
        Facility(
            facility_id=f"f{k}",
            x=float(rng.uniform(0, size)),
            y=float(rng.uniform(0, size)),
            kind=kinds[k % 3],
        )
        for k in range(n_facilities)
    ]
    camp = Camp(camp_id="L", boundary=box(0, 0, size, size), pop_total=200_000.0)
    return Dataset(
        aoi=camp.boundary,
        camps=[camp],
        facilities=facilities,
        footpaths=footpaths,
        shelters=ShelterSet(footprints=[box(0, 0, size, size)]),
    )


class TestPerformance:
    """Network-mode runs on footpath lattices."""

    def test_lattice_smoke(self, tmp_path):
        """2,025 cells and 500 facilities; every unit lands on the population."""
        dataset = lattice_dataset(2250.0, 91, 500, seed=99)
        run = run_access(RunConfig(workers=4, output_dir=str(tmp_path)), dataset)
        assert len(run.access) == 2025
        for row, units in zip(run.summary, (167, 167, 166)):
            assert row["population_weighted_A"] == pytest.approx(units / 200_000.0, rel=1e-9)

    @pytest.mark.slow
    def test_full_envelope(self, tmp_path):
        """10,000 cells, 5,000 facilities and about 50,000 edges on one worker within a minute."""
        dataset = lattice_dataset(5000.0, 159, 5000, seed=100)
        net = build_pedestrian_network(RunConfig(), dataset)
        assert net.n_edges == 2 * 159 * 158
        cfg = RunConfig(workers=1, output_dir=str(tmp_path))
        start = time.perf_counter()
        run = run_access(cfg, dataset)
        result = run_compare(run.access, run.access, output_dir=tmp_path / "change")
        elapsed = time.perf_counter() - start
        assert len(run.access) == 10_000
        assert elapsed < 60.0
        assert np.all(result.change.mean == 0.0)
        for row, units in zip(run.summary, (1667, 1667, 1666)):
            assert row["population_weighted_A"] == pytest.approx(units / 200_000.0, rel=1e-6)
