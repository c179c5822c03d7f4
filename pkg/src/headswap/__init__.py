"""Head-swap diffusion lab on a procedural parametric person world."""

__version__ = "0.1.0"
