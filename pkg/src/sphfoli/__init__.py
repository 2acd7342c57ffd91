"""Dihedral cone spherical surfaces as strip decompositions."""
