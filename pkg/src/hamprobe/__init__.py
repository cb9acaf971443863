"""Exact-simulation testers and learners for structured Hamiltonians and Pauli channels."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
