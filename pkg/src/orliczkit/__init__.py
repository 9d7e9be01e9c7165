"""Numerical toolkit for Orlicz, weak Orlicz and Orlicz-Morrey estimates."""

__version__ = "0.1.0"
