"""Conjunctive boolean networks with firing memory: simulation, gadgets, circuit compilation."""

__version__ = "0.1.0"
