"""SIR epidemics on diffusing Poisson particle clouds: simulation and bounds."""

__version__ = "0.1.0"
