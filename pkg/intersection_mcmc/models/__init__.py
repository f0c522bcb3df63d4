"""
Pydantic models for intersection-mcmc.
"""

from . import lanelet, measurement, report, topology
from .lanelet import *
from .measurement import *
from .report import *
from .topology import *

__all__ = (
    measurement.__all__ +
    topology.__all__ +
    lanelet.__all__ +
    report.__all__
)
