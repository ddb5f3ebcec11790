"""Figure and table renderer for latmaj benchmark CSV output."""

from .loader import Cell, improvement_over_ssgg, load_cells
from .figures import FIGURE_IDS, render_family_figure, render_thermal_spectrum
from .tables import render_latex_table, render_text_table

__version__ = "0.1.0"
