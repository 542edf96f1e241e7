from .outputs import FORMATS, emit_outputs
from .svg import render_polyline
from .tables import csv_text, format_value, manifest_text, read_csv, save_csv, write_csv

__all__ = [
    "FORMATS",
    "emit_outputs",
    "render_polyline",
    "csv_text",
    "format_value",
    "manifest_text",
    "read_csv",
    "save_csv",
    "write_csv",
]
