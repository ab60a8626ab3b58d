"""Correlations of bounded multiplicative functions: sieve tables, averages, pretentiousness and Furstenberg moments."""
__version__ = "0.1.0"
