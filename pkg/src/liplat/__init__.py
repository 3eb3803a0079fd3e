"""Weighted Lipschitz height functions on planar lattices.

Simulation and exact-verification toolkit: lattice patches, height models
with general boundary conditions, an exact enumeration oracle, the coupled
height/percolation/coin-flip triple, heat-bath and cluster samplers, and the
scaling studies built on top of them.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .lattice import (
    Annulus,
    FiniteGraph,
    LatticePatch,
    Lozenge,
    Rectangle,
    Torus,
    build_patch,
    parse_region,
)

__all__ = [
    "Annulus",
    "FiniteGraph",
    "LatticePatch",
    "Lozenge",
    "Rectangle",
    "Torus",
    "build_patch",
    "parse_region",
    "__version__",
]
