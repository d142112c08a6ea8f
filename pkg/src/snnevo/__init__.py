"""Evolutionary search for spiking-network agents scored on learning stability."""

__version__ = "0.1.0"
