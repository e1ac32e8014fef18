"""Quantum natural-language classifiers: pregroup parsing, IQP circuits, SPSA training."""

__version__ = "0.1.0"
