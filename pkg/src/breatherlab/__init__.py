"""Spectral simulator for perturbations of the plane wave in focusing cubic NLS.

The unknown is the offset ``w`` in ``u = e^{it}(1 + w)``, evolved on a
periodic grid with the exact linear group and a Picard-iterated Duhamel step.
"""
from .breathers import BreatherSpec, ExactOffset, evaluate, offset
from .grid import Grid1D, PerturbationField, SpectralField
from .solver import BlowupDetected, PicardDivergence, SolverConfig, Trajectory, run, step

__version__ = "0.1.0"

__all__ = [
    "BreatherSpec", "ExactOffset", "evaluate", "offset",
    "Grid1D", "PerturbationField", "SpectralField",
    "BlowupDetected", "PicardDivergence", "SolverConfig", "Trajectory", "run", "step",
]
