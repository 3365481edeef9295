"""Horizontal lifts, holonomy and ordered disk subdivisions in SO_0(1, n) -> H^n."""

from . import curves, disks, hyperbolic, lift, lorentz, paths, subdivision
from .config import DEFAULT, Tolerances

__all__ = ["curves", "disks", "hyperbolic", "lift", "lorentz", "paths",
           "subdivision", "DEFAULT", "Tolerances"]
__version__ = "0.1.0"
