"""Casimir-based control by interconnection for linear port-Hamiltonian systems."""

__version__ = "1.0.0"
