"""Counting and numerically solving Schubert problems on Grassmannians"""

__version__ = "0.1.0"
