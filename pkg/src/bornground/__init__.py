"""Born-Infeld ground states by minimization over the Pohozaev manifold."""

__version__ = "0.1.0"
