"""Validation diagnostics for Gaussian-process emulators of stochastic simulators."""

__version__ = "0.1.0"
