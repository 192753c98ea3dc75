"""Finite-resolution analysis of planar continua.

Rasterizes exact rational descriptions of compact planar sets onto
power-of-base grids, decides separation questions by minimum vertex
cuts on the cell adjacency graph, and aggregates the answers into
fiber reports, good-cut certificates, and decomposition models.
"""

from contfiber.grid import GridSpec
from contfiber.geometry import ContinuumSpec

__version__ = "0.1.0"

__all__ = ["GridSpec", "ContinuumSpec", "__version__"]
