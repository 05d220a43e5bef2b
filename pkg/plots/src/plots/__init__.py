"""Step-chart SVG renderer for inquir cost-analyzer timeline CSVs."""

from .render import SchemaError, read_timeline, render_text

__version__ = "0.1.0"

__all__ = ["SchemaError", "read_timeline", "render_text", "__version__"]
