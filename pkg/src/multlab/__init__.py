"""Exact workbench for multiplicity estimates of functional power series."""

__version__ = "0.1.0"
