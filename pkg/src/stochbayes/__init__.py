"""Simulator of memristor-based stochastic computing and hardware Bayesian operators."""

__version__ = "0.1.0"
