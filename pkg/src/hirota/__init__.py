"""Focusing Hirota equation: scattering, Darboux dressing, asymptotics, spectral PDE solver."""
