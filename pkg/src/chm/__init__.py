"""Classification of cocyclic Hadamard matrices of order 4p."""

__version__ = "0.1.0"
