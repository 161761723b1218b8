"""rdmix: p-adaptive IMEX mixed finite elements for reaction-diffusion systems."""

__version__ = "0.1.0"
