"""Compact hyperbolic polyhedra from combinatorics and dihedral angles.

The pipeline: validate a trivalent cell structure on the sphere
(`complexes`), check and decide the linear angle conditions exactly
(`angles`), reduce simple structures to the split prism by Whitehead
moves (`whitehead`), compute in the Minkowski hyperboloid model
(`minkowski`), and solve for the polyhedron itself (`realize`).
"""

from . import angles, catalog, complexes, minkowski, realize, whitehead

__all__ = ["angles", "catalog", "complexes", "minkowski", "realize",
           "whitehead"]
