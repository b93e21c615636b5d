"""Exact statistics of Birkhoff deviations for the truncated doubling circle maps."""

from .density import DensityComponent, StepFunction, assemble, component, error_bound, evaluate
from .dynamics import deviation_sum, entry_time, limit_deviation, locate, stable_orbit, step
from .exact_core import (
    BitString,
    RotationFraction,
    farey_enumerate,
    interval_I,
    sum_frac_parts,
    t_of,
    upper_string,
)

__version__ = "0.1.0"
