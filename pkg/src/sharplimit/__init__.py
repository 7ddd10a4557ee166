"""Numerical laboratory for the sharp-interface limit of a phase-field
cell-motility model."""
__version__ = "0.1.0"
