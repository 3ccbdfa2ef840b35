"""
Report UI for displaying run results with styled output.

Every CLI subcommand ends by handing its result to one of these methods;
tables go to stdout through a shared rich Console.
"""

import math
from typing import Dict, Iterable, List, Optional, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.style import Style
from rich.table import Table
from rich.text import Text

from accessibility.blocks import BlockSummary
from demography.living_space import LivingSpaceRow
from demography.units import CampUnitChange
from maskops.align import AlignResult
from maskops.metrics import CorpusScore, MaskScore

from .theme import ThemeColors


def _fmt(value: Optional[float], digits: int = 4) -> str:
    if value is None:
        return "n/a"
    if math.isinf(value):
        return "inf"
    return f"{value:.{digits}f}"


class ReportUI:
    """
    Renders run summaries as rich tables and panels.

    Example:
        >>> report = ReportUI()
        >>> report.access_summary("total", run.summary)
    """

    def __init__(self, console: Optional[Console] = None):
        self.console = console or Console()

    def _table(self, title: str, color: str, columns: Sequence[str]) -> Table:
        table = Table(
            title=title,
            title_style=Style(color=color, bold=True),
            border_style=Style(color=ThemeColors.BORDER),
            header_style=Style(color=color, bold=True),
        )
        for i, column in enumerate(columns):
            table.add_column(column, justify="left" if i == 0 else "right")
        return table

    def access_summary(self, tag: str, rows: Iterable[Dict[str, float]]) -> None:
        """Mean accessibility and people per facility per kind."""
        table = self._table(
            f"Accessibility ({tag})",
            ThemeColors.ACCENT,
            ["Column", "Mean A", "Pop-weighted A", "People per facility"],
        )
        for row in rows:
            table.add_row(
                str(row["column"]),
                _fmt(row["mean_A"], 6),
                _fmt(row["population_weighted_A"], 6),
                _fmt(row["people_per_facility"], 2),
            )
        self.console.print(table)

    def diagnostics(self, diagnostics: Dict[str, object]) -> None:
        """Zero-demand facilities, unreached cells and empty blocks."""
        table = Table(show_header=False, box=None, padding=(0, 2))
        table.add_column("Key", style=Style(color=ThemeColors.SECONDARY))
        table.add_column("Value", style=Style(color=ThemeColors.FG))

        for kind, ids in (diagnostics.get("zero_demand") or {}).items():
            if ids:
                shown = ", ".join(ids[:8]) + (f" (+{len(ids) - 8})" if len(ids) > 8 else "")
                table.add_row(f"Zero demand ({kind})", shown)
        for kind, count in (diagnostics.get("unreached_cells") or {}).items():
            table.add_row(f"Cells out of reach ({kind})", str(count))
        if diagnostics.get("empty_kinds"):
            table.add_row("Kinds without facilities", ", ".join(diagnostics["empty_kinds"]))
        if diagnostics.get("empty_blocks"):
            table.add_row("Empty blocks", ", ".join(diagnostics["empty_blocks"]))
        if diagnostics.get("dropped_segments"):
            table.add_row("Dropped footpath segments", str(diagnostics["dropped_segments"]))

        self.console.print(
            Panel(
                table,
                title=Text("Diagnostics", style=Style(color=ThemeColors.WARNING)),
                title_align="left",
                border_style=Style(color=ThemeColors.WARNING),
                padding=(0, 1),
            )
        )

    def key_values(self, title: str, values: Dict[str, object]) -> None:
        """A two-column panel for stage summaries (grid, network, allocation)."""
        table = Table(show_header=False, box=None, padding=(0, 2))
        table.add_column("Key", style=Style(color=ThemeColors.STAGE_SECONDARY))
        table.add_column("Value", style=Style(color=ThemeColors.FG))
        for key, value in values.items():
            table.add_row(key, _fmt(value, 2) if isinstance(value, float) else str(value))
        self.console.print(
            Panel(
                table,
                title=Text(title, style=Style(color=ThemeColors.STAGE_ACCENT)),
                title_align="left",
                border_style=Style(color=ThemeColors.STAGE_PRIMARY),
                padding=(0, 1),
            )
        )

    def blocks(self, summaries: Sequence[BlockSummary], title: str = "Blocks") -> None:
        table = self._table(title, ThemeColors.COMPARE_ACCENT, ["Block", "Cells", "Mean", "Delta"])
        for s in summaries:
            table.add_row(s.block_id, str(s.n_cells), _fmt(s.mean, 6), _fmt(s.delta, 6))
        self.console.print(table)

    def validation(self, rho: float, n_camps: int) -> None:
        text = Text()
        text.append("Spearman rho ", style=Style(color=ThemeColors.COMPARE_ACCENT))
        text.append(f"{rho:.3f}", style=Style(color=ThemeColors.FG, bold=True))
        text.append(f"  over {n_camps} camps", style=Style(color=ThemeColors.DIM))
        self.console.print(Panel(text, border_style=Style(color=ThemeColors.COMPARE_PRIMARY), padding=(0, 1)))

    def mask_scores(self, scores: Dict[str, MaskScore]) -> None:
        table = self._table("Mask scores", ThemeColors.ACCENT, ["Mask", "IoU", "Precision", "Recall", "F1"])
        for mask_id, s in scores.items():
            table.add_row(mask_id, _fmt(s.iou), _fmt(s.precision), _fmt(s.recall), _fmt(s.f1))
        self.console.print(table)

    def corpus_score(self, result: CorpusScore) -> None:
        table = self._table(
            f"Corpus ({result.mode}, {result.n_pairs} pairs)",
            ThemeColors.ACCENT,
            ["Metric", "Value", "Skipped"],
        )
        for name in ("iou", "precision", "recall", "f1"):
            table.add_row(name, _fmt(getattr(result, name)), str(result.skipped.get(name, 0)))
        self.console.print(table)

    def alignment(self, results: Dict[str, AlignResult]) -> None:
        table = self._table("Alignment", ThemeColors.STAGE_ACCENT, ["Mask", "du", "dv", "theta", "F1"])
        for mask_id, r in results.items():
            t = r.transform
            table.add_row(mask_id, str(t.du), str(t.dv), f"{t.theta:g}", _fmt(r.score))
        self.console.print(table)

    def living_space(self, rows: List[LivingSpaceRow]) -> None:
        table = self._table(
            "Living space", ThemeColors.ACCENT, ["Epoch", "Shelter m²", "Population", "m² / person"]
        )
        for row in rows:
            style = Style(color=ThemeColors.WARNING) if row.below_standard else None
            table.add_row(
                row.epoch,
                f"{row.shelter_area:,.0f}",
                f"{row.population:,.0f}",
                f"{row.area_per_person:.2f}",
                style=style,
            )
        self.console.print(table)

    def camp_units(self, rows: Sequence[CampUnitChange]) -> None:
        table = self._table(
            "Camp densities", ThemeColors.COMPARE_ACCENT, ["Camp", "km²", "Δ persons / km²", "Δ units / km²"]
        )
        for row in rows:
            table.add_row(
                row.camp_id,
                f"{row.area_km2:.3f}",
                f"{row.population_density_change:+,.0f}",
                f"{row.facility_density_change:+,.1f}",
            )
        self.console.print(table)

    def error(self, error: BaseException) -> None:
        """Structured error panel: exception type and message."""
        text = Text()
        text.append("✗ ", style=Style(color=ThemeColors.ERROR))
        text.append(f"{type(error).__name__}: ", style=Style(color=ThemeColors.ERROR, bold=True))
        text.append(str(error), style=Style(color=ThemeColors.FG))
        self.console.print(
            Panel(text, title="Error", title_align="left", border_style=Style(color=ThemeColors.ERROR), padding=(0, 1))
        )

    def written(self, paths: Iterable[object]) -> None:
        for path in paths:
            self.console.print(Text(f"✓ {path}", style=Style(color=ThemeColors.SUCCESS)))
