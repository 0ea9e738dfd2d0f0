"""Render figure analogues from shormagic experiment CSVs."""

__version__ = "0.1.0"

from figures.render import FigureSpec, SchemaError, render

__all__ = ["FigureSpec", "SchemaError", "render", "__version__"]
