"""Streaming data labeling with self-adapting heuristic ensembles, plus a runtime simulator."""
__version__ = "0.1.0"
