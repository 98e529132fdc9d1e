"""Exact certification of injectivity and multistationarity for reaction networks."""

__version__ = "0.1.0"
