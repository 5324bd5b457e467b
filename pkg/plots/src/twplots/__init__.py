"""Figure rendering for the kinetic-simulation CSV outputs."""

from .figures import (
    DEFAULT_MODES,
    plot_distribution,
    plot_timeseries,
    reference_slopes,
)
from .readers import (
    InputError,
    final_state,
    read_equilibrium,
    read_manifest,
    read_trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MODES",
    "InputError",
    "final_state",
    "plot_distribution",
    "plot_timeseries",
    "read_equilibrium",
    "read_manifest",
    "read_trajectory",
    "reference_slopes",
    "__version__",
]
