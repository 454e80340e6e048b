"""Figure rendering for kerrsqueeze CSV/JSON outputs."""

__version__ = "0.1.0"

from .figures import FigureSpecError, load_spec, render
