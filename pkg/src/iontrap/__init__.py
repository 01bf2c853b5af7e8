"""Trapped-ion experiment toolkit.

Photoionization loading rates, Paul-trap operating points, N-ion dynamics
with Doppler cooling, and laser-cavity locking models.
"""
__version__ = "0.1.0"
