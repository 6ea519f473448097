"""Entanglement dynamics from product states: models, sampling, exact dynamics and bound certificates."""

__version__ = "0.1.0"
