"""
Theme colors for the WashAccess CLI.

Primary green for run results, cyan for stage and network output,
coral for comparisons and validation.
"""


class ThemeColors:
    """Color scheme for WashAccess reports."""

    # Run results
    PRIMARY = "#2E5A38"
    SECONDARY = "#3A7A4A"
    ACCENT = "#4CAF50"

    # Stage and network output
    STAGE_PRIMARY = "#265A5A"
    STAGE_SECONDARY = "#367A7A"
    STAGE_ACCENT = "#00BCD4"

    # Comparisons and validation
    COMPARE_PRIMARY = "#5A3A3A"
    COMPARE_ACCENT = "#FF8C69"

    FG = "#E0E0E0"
    DIM = "#808080"

    SUCCESS = "#66BB6A"
    WARNING = "#FFA726"
    ERROR = "#EF5350"
    INFO = "#42A5F5"

    BORDER = "#3A7A4A"
