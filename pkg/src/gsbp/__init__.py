"""Encapsulated generalized summation-by-parts operators on curvilinear,
non-conforming multi-element 2D meshes."""

__version__ = "0.1.0"
