"""Mixed finite elements for the sixth-order problem -Delta^3 u = f on the unit square."""

from .convergence import ConvergenceRow, StudyConfig, StudyError, run_study, to_csv, to_markdown
from .manufactured import CATALOG, catalog
from .mesh import build_unit_square, refine
from .multiplier import BcKind
from .saddle import BlockSystem, build

__all__ = [
    "BcKind",
    "BlockSystem",
    "CATALOG",
    "ConvergenceRow",
    "StudyConfig",
    "StudyError",
    "build",
    "build_unit_square",
    "catalog",
    "refine",
    "run_study",
    "to_csv",
    "to_markdown",
]
