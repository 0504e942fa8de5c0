"""Longitudinal flight simulation and digital control of a quad tilt-rotor UAV."""

__version__ = "0.1.0"
