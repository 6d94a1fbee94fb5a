"""Publication-style grouped-bar figures from benchmark summary CSV files."""

from .figures import FIGURE_SPECS, FigureSpec, SchemaError, read_summary, render

__all__ = ["FIGURE_SPECS", "FigureSpec", "SchemaError", "read_summary", "render"]

__version__ = "0.1.0"
