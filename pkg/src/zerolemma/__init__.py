"""Exact verification toolkit for heights, implicit-function series and zero-lemma bounds over Q."""

__version__ = "0.1.0"
