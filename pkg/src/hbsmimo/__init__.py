"""Beamspace MIMO with hybrid beam selection and limited RVQ feedback."""
from .beamspace import HybridBeamSelector, SingleBeamSelector
from .exceptions import (ConfigurationError, DomainError, HbsError, NumericalError,
                         ReportIOError, SingularityError)
from .feedback import RVQQuantizer
from .precoding import ZeroForcingPrecoder

__version__ = "0.1.0"

__all__ = [
    "HybridBeamSelector", "SingleBeamSelector", "RVQQuantizer", "ZeroForcingPrecoder",
    "ConfigurationError", "DomainError", "HbsError", "NumericalError", "ReportIOError",
    "SingularityError",
]
