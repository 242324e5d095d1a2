"""Variational eigenvector finder built on SWAP-test statistics, simulated
classically and checked against an exact eigendecomposition oracle."""

__version__ = "0.1.0"
