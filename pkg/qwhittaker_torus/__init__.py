"""Interlaced particle dynamics on the discrete torus and its Gibbs measure."""

__version__ = "0.1.0"
SCHEMA_VERSION = 1
