"""Moebius boundary structures on CAT(-1) spaces and their circumcenter extensions."""

__version__ = "0.1.0"
