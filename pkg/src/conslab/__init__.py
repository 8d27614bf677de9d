"""Numerical laboratory for conservation-law drift and Hessian spectral
dynamics in small bias-free MLPs trained with full-batch gradient descent."""

__version__ = "0.1.0"
