"""Holder-continuous parameterizations of IFS attractors.

Subpackages cover: core IFS word machinery (ifs), cylinder geometry and
adjacency oracles (geometry), Holder path and whole-attractor curve
constructions (paths), non-branching arc parameterizations and polygonal
snowflakes (arcs), net/tree/tour parameterizations of connected attractors
(tours), Bedford-McMullen carpets and sponges (carpets),
empirical exponent estimators (analysis), and a command line front end
(cli).
"""

__version__ = "0.1.0"
