"""
Writers for the CSV and JSON artifacts produced by the command line.
"""
from .series import write_price_series, write_return_series
from .tables import write_histogram, write_overlay, write_qq, write_moment_table
from .density import write_lattice_state, write_grid
from .paths import write_paths, write_path_summary
from .report import write_json, write_report

__all__ = [
    'write_price_series',
    'write_return_series',
    'write_histogram',
    'write_overlay',
    'write_qq',
    'write_moment_table',
    'write_lattice_state',
    'write_grid',
    'write_paths',
    'write_path_summary',
    'write_json',
    'write_report',
]
