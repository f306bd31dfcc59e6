"""Conjugate cousins of CMC-1 surfaces in R^3 and minimal surfaces in S^3.

Modules: quat (quaternions, Hopf maps), surface (immersion grids and their
geometry), cousin (the cousin integrators), delaunay (helicoids and
unduloids), moduli (spherical triples, necksizes, forces), devmap
(sheeted spherical metrics), io and cli.
"""

__version__ = "0.1.0"
