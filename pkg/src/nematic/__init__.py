"""Nematic liquid crystal flows on a periodic square: director gradient flow,
Ginzburg-Landau relaxation and the coupled Ericksen-Leslie system."""

from .errors import BlowUpError, ConfigError, MissingColumnError, NematicError, NonFiniteError
from .grid import Grid2, read_snapshot, write_snapshot
from .oseen_frank import FrankConstants, eval_density

__all__ = [
    "BlowUpError",
    "ConfigError",
    "FrankConstants",
    "Grid2",
    "MissingColumnError",
    "NematicError",
    "NonFiniteError",
    "eval_density",
    "read_snapshot",
    "write_snapshot",
]
