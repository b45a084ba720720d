"""Reaction-frames workbench: corpus building, modeling, evaluation and the
A/B trust study for reader reactions to news headlines."""

__version__ = "0.1.0"
