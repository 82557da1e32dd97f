"""torusperc: a simulation laboratory for percolation on high-dimensional tori.

The package couples every percolation level through one counter-based uniform
per edge and builds, on top of that coupling, the finite objects of the
critical-window story: cluster statistics and sweeps, the closed-edge-count
matrix between large components with its spectral functionals, the
multiplicative and sprinkled component graphs and their coupling, the
excursion-length limit sampler, convolution diagrams of the two-point
function, and exact enumeration oracles that pin all of it down on tiny
graphs.
"""

from . import (
    coalescent,
    components,
    coupling,
    delta,
    diagrams,
    errors,
    lattice,
    oracle,
    rng,
    zlambda,
)
from .coupling import CoupledConfiguration, LevelPair, sprinkle_survival
from .lattice import NEAREST_NEIGHBOR, SPREAD_OUT, TorusSpec

__all__ = [
    "CoupledConfiguration",
    "LevelPair",
    "NEAREST_NEIGHBOR",
    "SPREAD_OUT",
    "TorusSpec",
    "coalescent",
    "components",
    "coupling",
    "delta",
    "diagrams",
    "errors",
    "lattice",
    "oracle",
    "rng",
    "sprinkle_survival",
    "zlambda",
]

__version__ = "0.1.0"
