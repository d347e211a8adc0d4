"""Toric-code anyon simulation: lattice, stabilizer and dense engines, photonic source, estimation."""

from .lattice import MinimalInstance, StringPath, ToricLattice
from .pauli import PauliString, commutes, multiply, parse, render
from .stabilizer import StabilizerState
from .statevector import DensityMatrix, StateVector

__all__ = [
    "DensityMatrix",
    "MinimalInstance",
    "PauliString",
    "StabilizerState",
    "StateVector",
    "StringPath",
    "ToricLattice",
    "commutes",
    "multiply",
    "parse",
    "render",
]
