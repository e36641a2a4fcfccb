"""Render campaign summaries into two-row penalty figures with error bands.

This package consumes only the emitted summary JSON files; it has no
dependency on the simulation code that produced them.
"""
from .spec import PlotSpec
from .render import render

__all__ = ["PlotSpec", "render"]

__version__ = "0.1.0"
