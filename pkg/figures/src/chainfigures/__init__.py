"""Render figures from solitonchain CSV artifacts (CSV in, image out)."""

from .render import FigureSpec, SchemaError, load_columns, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SchemaError", "load_columns", "render", "__version__"]
