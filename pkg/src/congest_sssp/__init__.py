"""Simulated CONGEST-model exact shortest paths with metered round complexity."""
__version__ = "0.1.0"
