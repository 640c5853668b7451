"""Figure generation from memdrift CSV outputs (read-only consumers)."""

from .csvdata import SchemaError, load_columns
from .iv import IvPlotResult, plot_iv
from .limit import LimitPlotResult, plot_limit_study, plot_limit_study_dir

__version__ = "0.1.0"
