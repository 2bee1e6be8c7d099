"""Exception types raised by graphlms."""

import numpy as np


class DimensionError(ValueError):
    """Array shapes do not agree with the graph size."""


class EigensolverError(np.linalg.LinAlgError):
    """The symmetric eigensolver failed or returned an inaccurate result."""


class ReconstructionError(ArithmeticError):
    """The sampling set carries no energy of the band, so nothing can be recovered."""


class InstabilityError(ArithmeticError):
    """The mean-square recursion has no steady state (spectral radius of Q >= 1)."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class UnachievableTargetError(ValueError):
    """No stable step-size reaches the requested steady-state MSD."""
