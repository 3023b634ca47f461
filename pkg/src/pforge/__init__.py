"""Exact toolkit for birational maps, Hamiltonian structure and Backlund symmetries of polynomial ODE systems."""

__version__ = "0.1.0"
