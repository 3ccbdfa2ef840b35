"""
Terminal output for WashAccess.
"""

from .report import ReportUI
from .theme import ThemeColors

__all__ = [
    "ReportUI",
    "ThemeColors",
]
