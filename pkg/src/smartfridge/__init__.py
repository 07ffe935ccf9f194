"""Simulated smart-fridge monitoring stack with a probability-calibration lab."""

__version__ = "0.1.0"
