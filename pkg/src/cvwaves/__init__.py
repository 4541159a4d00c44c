"""Steady periodic gravity water waves with constant vorticity on a conformal strip."""

from .governing import BifurcationPoint, SolutionPoint, WaveParameters
from .spectral import PeriodicSeries

__version__ = "0.1.0"

__all__ = ["PeriodicSeries", "WaveParameters", "SolutionPoint", "BifurcationPoint", "__version__"]
