"""Figure rendering for nanorotor CSV outputs."""

__version__ = "0.1.0"

from .figspec import FigureSpec, parse_spec_file, parse_spec_text
from .render import render
