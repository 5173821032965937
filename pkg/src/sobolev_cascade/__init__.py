"""Resonant generation sets, toy-model cascades and Sobolev growth on the torus."""
__version__ = "0.1.0"
