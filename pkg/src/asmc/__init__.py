"""Annealed sequential Monte Carlo for low-temperature Gibbs measures."""

__version__ = "0.1.0"
