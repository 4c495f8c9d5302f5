"""Sweeping processes with prox-regular moving sets: catching-up solver and variational residuals."""

__version__ = "0.1.0"
