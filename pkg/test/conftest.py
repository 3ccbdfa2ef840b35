"""Shared fixtures: small synthetic camps, grids and facility sets."""

import json
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pytest
from shapely.geometry import box, mapping

from core.schema import Facility, FacilityGender, FacilityKind
from demography.allocation import Camp, PopulationField, ShelterSet
from geo.grid import build_grid
from pipeline.dataset import Dataset


@pytest.fixture
def grid_2x2():
    """Four 50 m cells over a 100 m square camp."""
    return build_grid(box(0, 0, 100, 100), 50.0)


@pytest.fixture
def uniform_camp() -> Camp:
    return Camp(camp_id="C1", boundary=box(0, 0, 100, 100), pop_total=1000.0, pop_female=520.0, pop_male=480.0)


@pytest.fixture
def uniform_dataset(uniform_camp) -> Callable[..., Dataset]:
    """
    Factory for the desk-scale instance: one 100 m camp of 1,000 persons fully
    covered by shelter, with `n` co-located facilities at its center.
    """

    def make(n: int, kind: FacilityKind = FacilityKind.WATER_PUMP, gender: Optional[str] = None) -> Dataset:
        facilities = [
            Facility(
                facility_id=f"f-{k + 1}",
                x=50.0,
                y=50.0,
                kind=kind,
                gender=gender or FacilityGender.ALL,
            )
            for k in range(n)
        ]
        return Dataset(
            aoi=uniform_camp.boundary,
            camps=[uniform_camp],
            facilities=facilities,
            shelters=ShelterSet(footprints=[box(0, 0, 100, 100)]),
            has_gender_metadata=gender is not None,
        )

    return make


def random_population(rng: np.random.Generator, n_cells: int, spec_cells) -> PopulationField:
    spec, cells = spec_cells
    female = rng.uniform(0.0, 60.0, n_cells)
    male = rng.uniform(0.0, 60.0, n_cells)
    return PopulationField(spec=spec, cells=cells, total=female + male, female=female, male=male)


def feature_collection(features: List[Dict]) -> Dict:
    return {"type": "FeatureCollection", "features": features}


def feature(geom, **properties) -> Dict:
    return {"type": "Feature", "geometry": mapping(geom), "properties": properties}


def write_geojson(path: Path, features: List[Dict]) -> str:
    path.write_text(json.dumps(feature_collection(features)), encoding="utf-8")
    return str(path)
