"""Spectral triples on the Sierpinski gasket built from Clausen-deformed circles."""

from .results import EvalResult, ResidueEstimate

__version__ = "0.1.0"

__all__ = ["EvalResult", "ResidueEstimate", "__version__"]
