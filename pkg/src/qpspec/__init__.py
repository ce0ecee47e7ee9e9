"""Numerical toolkit for quasi-parabolic composition operators on
discretized Hardy spaces: series and Cauchy-integral constructions,
pseudospectral surrogates, and spiral-set containment checks."""

__version__ = "0.1.0"
