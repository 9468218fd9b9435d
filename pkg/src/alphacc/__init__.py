"""alphacc: token-based code clone detection toolkit."""

__version__ = "0.1.0"
