#!/usr/bin/env python3
"""
WashAccess CLI - command-line interface for the accessibility pipeline.

Each stage of the pipeline (grid, allocate, network, access) is a
subcommand that writes its intermediate files. compare and validate work
on written fields, camp-units on two epochs of camp and facility layers.
The mask tools (align, refine, metrics, bboxes) prepare shelter labels.

Exit codes: 0 on success, 1 on a runtime error, 2 on a usage error.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from rich.console import Console

from accessibility.field import camp_average
from config.config_loader import Config
from core.errors import DatasetError, WashAccessError
from core.logger import get_log_file_path, get_logger, get_session_start_time, setup_logging
from core.schema import DistanceMode, FacilityKind, GenderStream, RunConfig
from demography.allocation import shelter_area_by_camp
from demography.living_space import EMERGENCY_STANDARD_M2, living_space_report
from geo.grid import build_grid
from maskops.align import align_with
from maskops.components import extract_bboxes
from maskops.io import read_mask, write_bboxes, write_mask
from maskops.mask import BinaryMask, apply_transform
from maskops.metrics import score, score_corpus
from maskops.pseudo_label import pseudo_label
from pipeline.dataset import Dataset, load_blocks, load_camps, load_dataset, load_facilities
from pipeline.runner import (
    build_demand,
    build_pedestrian_network,
    facility_snaps,
    network_summary,
    run_access,
    run_camp_units,
    run_compare,
    run_validate,
)
from pipeline.writers import (
    read_field,
    write_grid_csv,
    write_json,
    write_population_csv,
    write_table_csv,
)
from ui.report import ReportUI

MASK_SUFFIXES = (".png", ".pgm")

# argparse dest -> RunConfig override key
_OVERRIDES: Tuple[Tuple[str, str], ...] = (
    ("cell_size", "cell_size"),
    ("d0", "d0"),
    ("sigma", "sigma"),
    ("distance_mode", "distance_mode"),
    ("kinds", "kinds"),
    ("scenario", "scenario.gender_stream"),
    ("allgender_factor", "scenario.allgender_factor"),
    ("snap_tolerance", "snap_tolerance"),
    ("workers", "workers"),
    ("batch_size", "batch_size"),
    ("strict", "strict"),
    ("translation_range", "masks.translation_range"),
    ("rotation_range", "masks.rotation_range"),
    ("rotation_step", "masks.rotation_step"),
    ("connectivity", "masks.connectivity"),
    ("aoi", "aoi_path"),
    ("camps", "camps_path"),
    ("population_csv", "population_csv_path"),
    ("facilities", "facilities_path"),
    ("footpaths", "footpaths_path"),
    ("shelters", "shelters_path"),
    ("blocks", "blocks_path"),
    ("output_dir", "output_dir"),
)


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("run settings")
    group.add_argument("--cell-size", type=float, help="grid cell side in meters (default 50)")
    group.add_argument("--workers", type=int, help="threads for parallel stages")
    group.add_argument("--strict", action="store_true", default=None,
                       help="reject facilities outside every camp boundary")
    group.add_argument("-o", "--output-dir", help="directory for result files")


def _add_layer_flags(parser: argparse.ArgumentParser, layers: Sequence[str]) -> None:
    group = parser.add_argument_group("input layers (override paths.* in the config)")
    helps = {
        "aoi": "area of interest polygons (GeoJSON); defaults to the union of camps",
        "camps": "camp boundaries with pop_total/pop_female/pop_male (GeoJSON)",
        "population-csv": "camp populations keyed by camp_id (CSV)",
        "facilities": "facility points with kind, gender, count (GeoJSON)",
        "footpaths": "footpath lines (GeoJSON)",
        "shelters": "shelter footprints (GeoJSON) or per-cell row,col,shelter_area (CSV)",
        "blocks": "block polygons with block_id (GeoJSON)",
    }
    for layer in layers:
        group.add_argument(f"--{layer}", help=helps[layer])


def _add_network_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("network")
    group.add_argument("--snap-tolerance", type=float, help="merge footpath endpoints closer than this (m)")
    group.add_argument("--batch-size", type=int, help="sources per shortest-path batch")


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("alignment search")
    group.add_argument("--translation-range", type=int, help="largest shift in pixels (default 8)")
    group.add_argument("--rotation-range", type=float, help="largest rotation in degrees (default 5)")
    group.add_argument("--rotation-step", type=float, help="rotation step in degrees (default 1)")


def _mask_pairs(pred: Path, truth: Path) -> List[Tuple[str, Path, Path]]:
    """(mask id, prediction, truth) from two files or two directories matched by file stem."""
    if pred.is_dir() and truth.is_dir():
        truths = {p.stem: p for p in sorted(truth.iterdir()) if p.suffix.lower() in MASK_SUFFIXES}
        pairs = [
            (p.stem, p, truths[p.stem])
            for p in sorted(pred.iterdir())
            if p.suffix.lower() in MASK_SUFFIXES and p.stem in truths
        ]
        if not pairs:
            raise DatasetError(f"no mask file names shared by {pred} and {truth}", layer="masks")
        return pairs
    if pred.is_dir() or truth.is_dir():
        raise DatasetError("pass two mask files or two directories", layer="masks")
    return [(pred.stem, pred, truth)]


class WashAccessCLI:
    """
    Command-line interface for WashAccess runs.

    Attributes:
        console: Rich console for reports
        report: Table and panel renderer
        logger: Module logger

    Example:
        >>> cli = WashAccessCLI()
        >>> cli.run(["access", "--scenario", "female", "--allgender-factor", "0.75"])
        0
    """

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()
        self.report = ReportUI(self.console)
        self.logger = get_logger(__name__)
        self.config: Optional[Config] = None

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog="washaccess",
            description="Gender-aware WASH facility accessibility for displacement camps.",
        )
        parser.add_argument("-c", "--config", default="config/config.yaml",
                            help="YAML config file (default: config/config.yaml)")
        parser.add_argument("--log-level", help="console log level (default from config, WARNING)")
        sub = parser.add_subparsers(dest="command", metavar="COMMAND")

        p = sub.add_parser("grid", help="build the analysis grid over the AOI")
        _add_run_flags(p)
        _add_layer_flags(p, ["aoi", "camps"])
        p.set_defaults(handler=self.cmd_grid)

        p = sub.add_parser("allocate", help="apportion camp populations to grid cells")
        _add_run_flags(p)
        _add_layer_flags(p, ["aoi", "camps", "population-csv", "shelters"])
        p.set_defaults(handler=self.cmd_allocate)

        p = sub.add_parser("network", help="build the pedestrian network and snap facilities")
        _add_run_flags(p)
        _add_layer_flags(p, ["footpaths", "facilities"])
        _add_network_flags(p)
        p.set_defaults(handler=self.cmd_network)

        p = sub.add_parser("access", help="compute an accessibility field for one scenario")
        _add_run_flags(p)
        _add_layer_flags(
            p, ["aoi", "camps", "population-csv", "facilities", "footpaths", "shelters", "blocks"]
        )
        _add_network_flags(p)
        g = p.add_argument_group("accessibility")
        g.add_argument("--d0", type=float, help="catchment threshold in meters (default 1609)")
        g.add_argument("--sigma", type=float, help="Gaussian decay scale in meters (default 402)")
        g.add_argument("--distance-mode", choices=[m.value for m in DistanceMode],
                       help="network (default) or euclidean")
        g.add_argument("--kinds", nargs="+", choices=[k.value for k in FacilityKind],
                       help="facility kinds to compute (default all)")
        g.add_argument("--scenario", choices=[s.value for s in GenderStream],
                       help="population stream: total (default), female or male")
        g.add_argument("--allgender-factor", type=float,
                       help="share of all-gender capacity usable by the female stream, in (0, 1]")
        p.set_defaults(handler=self.cmd_access)

        p = sub.add_parser("compare", help="per-cell and per-block change between two fields")
        p.add_argument("field_a", type=Path, help="earlier field CSV")
        p.add_argument("field_b", type=Path, help="later field CSV")
        p.add_argument("--blocks", help="block polygons (GeoJSON)")
        p.add_argument("--gender-gap", action="store_true",
                       help="treat the fields as female and male and report female - male")
        p.add_argument("--column", default="A_mean", help="column summarized per block (default A_mean)")
        p.add_argument("--cell-size", type=float, help="grid cell size if it cannot be inferred")
        p.add_argument("-o", "--output-dir", help="directory for result files")
        p.set_defaults(handler=self.cmd_compare)

        p = sub.add_parser("camp-units", help="camp population and facility densities between two epochs")
        p.add_argument("--camps-a", required=True, help="camp boundaries and populations, first epoch (GeoJSON)")
        p.add_argument("--camps-b", required=True, help="camp populations, second epoch (GeoJSON)")
        p.add_argument("--facilities-a", required=True, help="facility points, first epoch (GeoJSON)")
        p.add_argument("--facilities-b", required=True, help="facility points, second epoch (GeoJSON)")
        p.add_argument("-o", "--output-dir", help="directory for camp_units.csv")
        p.set_defaults(handler=self.cmd_camp_units)

        p = sub.add_parser("validate", help="Spearman rho of camp accessibility against a survey")
        p.add_argument("field", type=Path, help="field CSV")
        p.add_argument("--survey", required=True, type=Path,
                       help="CSV with camp_id, people_per_facility")
        p.add_argument("--camps", help="camp boundaries (GeoJSON)")
        p.add_argument("--column", default="A_mean", help="field column averaged per camp")
        p.add_argument("--reducer", choices=["cell", "population"], default="cell",
                       help="camp average: plain cell mean or population-weighted")
        p.add_argument("--cell-size", type=float, help="grid cell size if it cannot be inferred")
        p.add_argument("-o", "--output-dir", help="directory for the scatter CSV")
        p.set_defaults(handler=self.cmd_validate)

        p = sub.add_parser("align", help="find the shift and rotation of a mask onto a reference")
        p.add_argument("mask", type=Path, help="mask to move (PNG/PGM), or a directory")
        p.add_argument("reference", type=Path, help="reference mask, or a directory")
        p.add_argument("--out", type=Path, help="write the moved mask(s) here (file or directory)")
        p.add_argument("--workers", type=int, help="threads for the rotation search")
        _add_search_flags(p)
        p.set_defaults(handler=self.cmd_align)

        p = sub.add_parser("refine", help="refine a predicted mask with a reference mask")
        p.add_argument("prediction", type=Path, help="coarse predicted mask")
        p.add_argument("reference", type=Path, help="structural reference mask")
        p.add_argument("--out", type=Path, required=True, help="refined mask file")
        p.add_argument("--align", action="store_true", help="align the reference to the prediction first")
        p.add_argument("--workers", type=int, help="threads for the rotation search")
        _add_search_flags(p)
        p.set_defaults(handler=self.cmd_refine)

        p = sub.add_parser("metrics", help="IoU, precision, recall and F1 of predicted masks")
        p.add_argument("prediction", type=Path, help="predicted mask or directory")
        p.add_argument("truth", type=Path, help="ground-truth mask or directory")
        p.add_argument("--mode", choices=["micro", "macro"], default="micro",
                       help="pool counts (micro) or average per-mask ratios (macro)")
        p.add_argument("--workers", type=int, default=1, help="threads for scoring")
        p.add_argument("--out", type=Path, help="write the scores as JSON")
        p.set_defaults(handler=self.cmd_metrics)

        p = sub.add_parser("bboxes", help="bounding boxes of connected mask components")
        p.add_argument("masks", type=Path, nargs="+", help="mask files")
        p.add_argument("--connectivity", type=int, choices=[4, 8], help="pixel connectivity (default 8)")
        p.add_argument("--out", type=Path, required=True, help="CSV of boxes")
        p.set_defaults(handler=self.cmd_bboxes)

        p = sub.add_parser("living-space", help="shelter area per person over time")
        p.add_argument("series", type=Path, help="CSV with epoch, shelter_area, population")
        p.add_argument("--standard", type=float, default=EMERGENCY_STANDARD_M2,
                       help=f"minimum m² per person (default {EMERGENCY_STANDARD_M2})")
        p.add_argument("-o", "--output-dir", help="directory for the report CSV")
        p.set_defaults(handler=self.cmd_living_space)

        return parser

    def run_config(self, args: argparse.Namespace) -> RunConfig:
        overrides: Dict[str, Any] = {}
        for dest, key in _OVERRIDES:
            value = getattr(args, dest, None)
            if value is not None:
                overrides[key] = value
        return self.config.to_run_config(overrides)

    def _dataset(self, cfg: RunConfig, layers: Optional[Sequence[str]] = None) -> Dataset:
        return load_dataset(cfg, layers)

    def cmd_grid(self, args: argparse.Namespace) -> int:
        cfg = self.run_config(args)
        dataset = self._dataset(cfg, ("aoi",))
        dataset.require("aoi")
        spec, cells = build_grid(dataset.aoi, cfg.cell_size)
        path = write_grid_csv(cells, Path(cfg.output_dir) / "grid.csv")
        self.report.key_values(
            "Grid",
            {
                "cells": len(cells),
                "cell size (m)": spec.cell_size,
                "bounding grid": f"{spec.n_rows} x {spec.n_cols}",
                "origin": f"({spec.origin_x:g}, {spec.origin_y:g})",
            },
        )
        self.report.written([path])
        return 0

    def cmd_allocate(self, args: argparse.Namespace) -> int:
        cfg = self.run_config(args)
        dataset = self._dataset(cfg, ("aoi", "camps", "shelters"))
        demand = build_demand(cfg, dataset)
        path = write_population_csv(demand, Path(cfg.output_dir) / "population.csv")
        areas = shelter_area_by_camp(dataset.camps, dataset.shelters)
        self.report.key_values(
            "Allocation",
            {
                "cells": len(demand),
                "camp population": float(sum(c.pop_total for c in dataset.camps)),
                "allocated total": demand.mass("total"),
                "allocated female": demand.mass("female"),
                "allocated male": demand.mass("male"),
                "shelter area (m²)": float(sum(areas.values())),
            },
        )
        self.report.written([path])
        return 0

    def cmd_network(self, args: argparse.Namespace) -> int:
        cfg = self.run_config(args)
        dataset = self._dataset(cfg, ("footpaths", "facilities"))
        net = build_pedestrian_network(cfg, dataset)
        summary = network_summary(net)
        out = Path(cfg.output_dir)
        written = [write_json(summary.model_dump(), out / "network.json")]
        snaps = facility_snaps(net, dataset)
        if snaps:
            written.append(write_table_csv(snaps, list(snaps[0]), out / "facility_snaps.csv"))
        self.report.key_values("Network", summary.model_dump())
        self.report.written(written)
        return 0

    def cmd_access(self, args: argparse.Namespace) -> int:
        cfg = self.run_config(args)
        dataset = self._dataset(cfg)
        run = run_access(cfg, dataset)
        self.report.access_summary(run.access.tag, run.summary)
        self.report.diagnostics(run.diagnostics.model_dump(mode="json"))
        if run.blocks:
            self.report.blocks(run.blocks)
        self.report.written(run.outputs.values())
        return 0

    def cmd_compare(self, args: argparse.Namespace) -> int:
        field_a = read_field(args.field_a, cell_size=args.cell_size)
        field_b = read_field(args.field_b, cell_size=args.cell_size)
        blocks = load_blocks(args.blocks) if args.blocks else []
        output_dir = args.output_dir or self.config.get_with_env("paths.output_dir", "output")
        mode = "gender_gap" if args.gender_gap else "change"
        run = run_compare(field_a, field_b, blocks, output_dir=output_dir, column=args.column, mode=mode)
        if run.blocks:
            label = "Female - male" if args.gender_gap else "Change in"
            self.report.blocks(run.blocks, title=f"{label} {args.column}")
        self.report.written(run.outputs.values())
        return 0

    def cmd_camp_units(self, args: argparse.Namespace) -> int:
        facilities_a, _ = load_facilities(args.facilities_a)
        facilities_b, _ = load_facilities(args.facilities_b)
        output_dir = args.output_dir or self.config.get_with_env("paths.output_dir", "output")
        run = run_camp_units(
            load_camps(args.camps_a), load_camps(args.camps_b), facilities_a, facilities_b, output_dir=output_dir
        )
        self.report.camp_units(run.rows)
        self.report.written(run.outputs.values())
        return 0

    def cmd_validate(self, args: argparse.Namespace) -> int:
        camps_path = args.camps or self.config.get_with_env("paths.camps")
        if not camps_path:
            raise DatasetError("validation needs camp boundaries (--camps)", layer="camps")
        field_ = read_field(args.field, cell_size=args.cell_size)
        camps = load_camps(camps_path)
        values = camp_average(field_, camps, column=args.column, reducer=args.reducer)
        output_dir = args.output_dir or self.config.get_with_env("paths.output_dir", "output")
        result = run_validate(values, args.survey, output_dir=output_dir)
        self.report.validation(result.rho, result.n_camps)
        if result.scatter_path:
            self.report.written([result.scatter_path])
        return 0

    def _search(self, args: argparse.Namespace):
        return self.run_config(args).masks

    def cmd_align(self, args: argparse.Namespace) -> int:
        search = self._search(args)
        workers = args.workers or 1
        results = {}
        written = []
        for mask_id, mask_path, ref_path in _mask_pairs(args.mask, args.reference):
            mask = read_mask(mask_path)
            result = align_with(mask, read_mask(ref_path), search, workers=workers)
            results[mask_id] = result
            if args.out:
                target = args.out / mask_path.name if args.mask.is_dir() else args.out
                written.append(write_mask(apply_transform(mask, result.transform), target))
        self.report.alignment(results)
        self.report.written(written)
        return 0

    def cmd_refine(self, args: argparse.Namespace) -> int:
        search = self._search(args) if args.align else None
        label = pseudo_label(
            read_mask(args.prediction), read_mask(args.reference), search=search, workers=args.workers or 1
        )
        path = write_mask(label.mask, args.out)
        if label.alignment is not None:
            self.report.alignment({args.reference.stem: label.alignment})
        self.report.key_values("Refined label", {"shelter pixels": label.mask.count})
        self.report.written([path])
        return 0

    def cmd_metrics(self, args: argparse.Namespace) -> int:
        loaded: List[Tuple[str, BinaryMask, BinaryMask]] = [
            (mask_id, read_mask(p), read_mask(t)) for mask_id, p, t in _mask_pairs(args.prediction, args.truth)
        ]
        per_mask = {mask_id: score(p, t) for mask_id, p, t in loaded}
        corpus = score_corpus([(p, t) for _, p, t in loaded], mode=args.mode, workers=args.workers)
        if len(per_mask) <= 20:
            self.report.mask_scores(per_mask)
        self.report.corpus_score(corpus)
        if args.out:
            document = {
                "corpus": corpus.model_dump(),
                "masks": {mask_id: s.model_dump() for mask_id, s in per_mask.items()},
            }
            self.report.written([write_json(document, args.out)])
        return 0

    def cmd_bboxes(self, args: argparse.Namespace) -> int:
        connectivity = args.connectivity or self.config.to_run_config().masks.connectivity
        rows = []
        for path in args.masks:
            rows.extend((path.stem, box) for box in extract_bboxes(read_mask(path), connectivity))
        out = write_bboxes(rows, args.out)
        self.report.key_values("Bounding boxes", {"masks": len(args.masks), "boxes": len(rows)})
        self.report.written([out])
        return 0

    def cmd_living_space(self, args: argparse.Namespace) -> int:
        if not args.series.exists():
            raise DatasetError(f"file not found: {args.series}", layer="living_space")
        frame = pd.read_csv(args.series, dtype={"epoch": str})
        missing = {"epoch", "shelter_area", "population"} - set(frame.columns)
        if missing:
            raise DatasetError(f"missing columns: {', '.join(sorted(missing))}", layer="living_space")
        rows = living_space_report(
            dict(zip(frame["epoch"], frame["shelter_area"])),
            dict(zip(frame["epoch"], frame["population"])),
            standard=args.standard,
        )
        self.report.living_space(rows)
        if args.output_dir:
            path = write_table_csv(
                [row.model_dump() for row in rows],
                list(rows[0].model_dump()) if rows else ["epoch"],
                Path(args.output_dir) / "living_space.csv",
            )
            self.report.written([path])
        return 0

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Parse `argv` and run one subcommand.

        Returns:
            Process exit code
        """
        parser = self.build_parser()
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return 2

        try:
            self.config = Config(config_file_path=args.config)
            self.config.load_config()
            settings = self.config.logging_settings()
            if args.log_level:
                settings["console_level"] = args.log_level.upper()
            setup_logging(**settings, name=args.command.replace("-", "_"))
            log_file = get_log_file_path()
            self.logger.info(
                f"{args.command} session started {get_session_start_time():%Y-%m-%d %H:%M:%S}"
                + (f", log file {log_file}" if log_file else "")
            )

            handler: Callable[[argparse.Namespace], int] = args.handler
            return handler(args)
        except (WashAccessError, ValueError, OSError) as e:
            self.logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
            self.report.error(e)
            return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point for the CLI.

    Usage:
        python cli.py access --scenario female --allgender-factor 0.75
    """
    try:
        return WashAccessCLI().run(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2


if __name__ == "__main__":
    sys.exit(main())
