"""Physical constants (CODATA 2018 exact or recommended values), SI units."""

C_LIGHT = 299_792_458.0
"""Speed of light in vacuum [m/s]."""

HBAR = 1.054571817e-34
"""Reduced Planck constant [J s]."""

K_B = 1.380649e-23
"""Boltzmann constant [J/K]."""
