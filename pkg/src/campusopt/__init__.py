"""Campus mobility and space-utilisation toolkit."""
from .errors import InfeasibleError, NumericalError, TimetableConflict

__version__ = "0.1.0"
__all__ = ["InfeasibleError", "NumericalError", "TimetableConflict", "__version__"]
