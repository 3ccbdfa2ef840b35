"""Test suite for the command-line interface.

Runs point -c at a temporary config with file logging turned off, except
where the log file itself is under test. Run tests:

    pytest test/test_cli.py -v
"""

import io
import json

import numpy as np
import pandas as pd
import pytest
from rich.console import Console
from shapely.geometry import Point, box

from accessibility.distances import EuclideanDistanceModel
from cli import WashAccessCLI, main
from core.factory import DistanceModelFactory
from core.logger import get_log_file_path, get_session_start_time, setup_logging
from maskops.io import read_mask, write_mask
from maskops.mask import BinaryMask

from conftest import feature, write_geojson


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("logging:\n  dir: null\n  console_level: ERROR\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def cli():
    return WashAccessCLI(console=Console(file=io.StringIO(), width=120))


def console_text(cli: WashAccessCLI) -> str:
    return cli.console.file.getvalue()


class TestUsage:
    """Exit codes for usage errors and help."""

    def test_no_command(self, cli, config_file):
        assert cli.run(["-c", config_file]) == 2

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "access" in capsys.readouterr().out

    def test_bad_choice(self, config_file):
        assert main(["-c", config_file, "access", "--scenario", "children"]) == 2

    def test_missing_layer_file(self, cli, config_file, tmp_path):
        code = cli.run(["-c", config_file, "grid", "--camps", str(tmp_path / "absent.geojson")])
        assert code == 1
        assert "file not found" in console_text(cli)


class TestAccessCommands:
    """Pipeline stages run from the command line."""

    @pytest.fixture
    def layers(self, tmp_path):
        camp = box(0, 0, 100, 100)
        return {
            "camps": write_geojson(
                tmp_path / "camps.geojson",
                [feature(camp, camp_id="C1", pop_total=1000, pop_female=520, pop_male=480)],
            ),
            "facilities": write_geojson(
                tmp_path / "facilities.geojson",
                [feature(Point(50, 50), facility_id=f"wp-{k}", kind="water_pump") for k in range(40)],
            ),
            "shelters": write_geojson(tmp_path / "shelters.geojson", [feature(camp)]),
        }

    def test_grid(self, cli, config_file, layers, tmp_path):
        out = tmp_path / "out"
        code = cli.run(["-c", config_file, "grid", "--camps", layers["camps"], "-o", str(out)])
        assert code == 0
        assert len(pd.read_csv(out / "grid.csv")) == 4

    def test_allocate(self, cli, config_file, layers, tmp_path):
        out = tmp_path / "out"
        argv = ["-c", config_file, "allocate", "--camps", layers["camps"], "--shelters", layers["shelters"]]
        assert cli.run(argv + ["-o", str(out)]) == 0
        population = pd.read_csv(out / "population.csv")
        assert population["pop_total"].sum() == pytest.approx(1000.0)

    def test_access_euclidean(self, cli, config_file, layers, tmp_path):
        out = tmp_path / "out"
        argv = [
            "-c", config_file, "access",
            "--camps", layers["camps"],
            "--facilities", layers["facilities"],
            "--shelters", layers["shelters"],
            "--distance-mode", "euclidean",
            "--kinds", "water_pump",
            "-o", str(out),
        ]
        assert cli.run(argv) == 0
        field_ = pd.read_csv(out / "access_total.csv")
        np.testing.assert_allclose(field_["A_water"], 0.04, rtol=1e-9)
        assert (out / "summary_total.csv").exists()

    def test_access_without_shelters(self, cli, config_file, layers):
        argv = ["-c", config_file, "access", "--camps", layers["camps"], "--distance-mode", "euclidean"]
        assert cli.run(argv) == 1

    def test_gender_gap_compare(self, cli, config_file, layers, tmp_path):
        facilities = write_geojson(
            tmp_path / "all_gender.geojson",
            [feature(Point(50, 50), facility_id=f"wp-{k}", kind="water_pump", gender="all") for k in range(40)],
        )
        base = [
            "-c", config_file, "access",
            "--camps", layers["camps"],
            "--facilities", facilities,
            "--shelters", layers["shelters"],
            "--distance-mode", "euclidean",
            "--kinds", "water_pump",
        ]
        out = tmp_path / "out"
        assert cli.run(base + ["--scenario", "female", "--allgender-factor", "0.75", "-o", str(out)]) == 0
        assert cli.run(base + ["--scenario", "male", "-o", str(out)]) == 0
        argv = [
            "-c", config_file, "compare",
            str(out / "access_female_0.75.csv"), str(out / "access_male.csv"),
            "--gender-gap", "-o", str(out),
        ]
        assert cli.run(argv) == 0
        gap = pd.read_csv(out / "gender_gap.csv")
        np.testing.assert_allclose(gap["A_water"], -0.01, rtol=1e-9)

    def test_distance_model_failure_is_reported(self, cli, config_file, layers, monkeypatch):
        class Unbuildable(EuclideanDistanceModel):
            def __init__(self):
                raise ValueError("no straight lines today")

        monkeypatch.setitem(DistanceModelFactory._models, "euclidean", Unbuildable)
        argv = [
            "-c", config_file, "access",
            "--camps", layers["camps"],
            "--facilities", layers["facilities"],
            "--shelters", layers["shelters"],
            "--distance-mode", "euclidean",
        ]
        assert cli.run(argv) == 1
        assert "DistanceModelError" in console_text(cli)


class TestCampUnits:
    """Camp densities between two epochs."""

    def test_report(self, cli, config_file, tmp_path):
        camp = box(0, 0, 1000, 1000)
        argv = [
            "-c", config_file, "camp-units",
            "--camps-a", write_geojson(tmp_path / "camps_a.geojson", [feature(camp, camp_id="A", pop_total=10_000)]),
            "--camps-b", write_geojson(tmp_path / "camps_b.geojson", [feature(camp, camp_id="A", pop_total=12_000)]),
            "--facilities-a", write_geojson(
                tmp_path / "fac_a.geojson", [feature(Point(10, 10), facility_id="1", kind="latrine", count=5)]
            ),
            "--facilities-b", write_geojson(
                tmp_path / "fac_b.geojson",
                [
                    feature(Point(10, 10), facility_id="1", kind="latrine", count=5),
                    feature(Point(500, 500), facility_id="2", kind="latrine", count=3),
                ],
            ),
            "-o", str(tmp_path / "out"),
        ]
        assert cli.run(argv) == 0
        table = pd.read_csv(tmp_path / "out" / "camp_units.csv", dtype={"camp_id": str})
        assert table["population_density_change"].tolist() == [2000.0]
        assert table["facility_density_change"].tolist() == [3.0]
        assert "Camp densities" in console_text(cli)


class TestMaskCommands:
    """Metrics, refinement and boxes on small mask files."""

    @pytest.fixture
    def mask_dirs(self, tmp_path):
        pred, truth = tmp_path / "pred", tmp_path / "truth"
        pred.mkdir()
        truth.mkdir()
        full = BinaryMask.from_array(np.ones((2, 2)))
        write_mask(full, pred / "a.png")
        write_mask(full, truth / "a.png")
        write_mask(BinaryMask.from_array([[1, 0], [0, 0]]), pred / "b.png")
        write_mask(BinaryMask.from_array([[1, 1], [1, 0]]), truth / "b.png")
        return pred, truth

    @pytest.mark.parametrize("mode, recall", [("micro", 5 / 7), ("macro", 2 / 3)])
    def test_metrics(self, cli, config_file, mask_dirs, tmp_path, mode, recall):
        pred, truth = mask_dirs
        out = tmp_path / "scores.json"
        argv = ["-c", config_file, "metrics", str(pred), str(truth), "--mode", mode, "--out", str(out)]
        assert cli.run(argv) == 0
        document = json.loads(out.read_text(encoding="utf-8"))
        assert document["corpus"]["recall"] == pytest.approx(recall)
        assert sorted(document["masks"]) == ["a", "b"]

    def test_metrics_unmatched_directories(self, cli, config_file, tmp_path):
        (tmp_path / "p").mkdir()
        (tmp_path / "t").mkdir()
        write_mask(BinaryMask.zeros(2, 2), tmp_path / "p" / "x.png")
        assert cli.run(["-c", config_file, "metrics", str(tmp_path / "p"), str(tmp_path / "t")]) == 1

    def test_refine(self, cli, config_file, mask_dirs, tmp_path):
        pred, truth = mask_dirs
        out = tmp_path / "refined.png"
        argv = ["-c", config_file, "refine", str(pred / "b.png"), str(truth / "b.png"), "--out", str(out)]
        assert cli.run(argv) == 0
        assert read_mask(out) == BinaryMask.from_array([[1, 0], [0, 0]])

    def test_bboxes(self, cli, config_file, mask_dirs, tmp_path):
        pred, _ = mask_dirs
        out = tmp_path / "boxes.csv"
        argv = ["-c", config_file, "bboxes", str(pred / "a.png"), str(pred / "b.png"), "--out", str(out)]
        assert cli.run(argv) == 0
        assert pd.read_csv(out, dtype={"mask_id": str})["mask_id"].tolist() == ["a", "b"]


class TestLivingSpace:
    """Shelter area per person from a series CSV."""

    def test_report(self, cli, config_file, tmp_path):
        series = tmp_path / "series.csv"
        series.write_text(
            "epoch,shelter_area,population\n2017,3000000,1000000\n2025,7330000,1000000\n", encoding="utf-8"
        )
        out = tmp_path / "out"
        assert cli.run(["-c", config_file, "living-space", str(series), "-o", str(out)]) == 0
        report = pd.read_csv(out / "living_space.csv", dtype={"epoch": str})
        assert report["epoch"].tolist() == ["2017", "2025"]
        assert report["below_standard"].tolist() == [True, False]

    def test_missing_columns(self, cli, config_file, tmp_path):
        series = tmp_path / "series.csv"
        series.write_text("epoch,population\n2017,10\n", encoding="utf-8")
        assert cli.run(["-c", config_file, "living-space", str(series)]) == 1


class TestSessionLog:
    """Each subcommand writes its own log file when a log directory is configured."""

    def test_log_file_per_command(self, cli, tmp_path):
        log_dir = tmp_path / "log"
        config = tmp_path / "logging.yaml"
        config.write_text(f"logging:\n  dir: {log_dir}\n  console_level: ERROR\n", encoding="utf-8")
        series = tmp_path / "series.csv"
        series.write_text("epoch,shelter_area,population\n2025,7330000,1000000\n", encoding="utf-8")
        try:
            assert cli.run(["-c", str(config), "living-space", str(series)]) == 0
            assert get_log_file_path() == log_dir / "washaccess_living_space.log"
            assert get_session_start_time() is not None
        finally:
            setup_logging(log_dir=None)
        assert "living-space session started" in (log_dir / "washaccess_living_space.log").read_text(encoding="utf-8")
