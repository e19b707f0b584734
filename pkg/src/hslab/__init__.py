"""Numerical laboratory for competitive Hele-Shaw flow.

Stationary solutions via quadratic differentials and level-line potentials,
Green's surfaces, and the interface-erosion lattice model.
"""

__version__ = "0.1.0"
