"""Exact Clifford orbits, entropy vectors, Dicke cones and magic measures."""
