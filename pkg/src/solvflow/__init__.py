"""Mean curvature flow of two-dimensional subgroups in three-dimensional solvable Lie groups."""

__version__ = "0.1.0"
