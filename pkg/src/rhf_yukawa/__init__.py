"""Reduced Hartree-Fock crystals with Yukawa interaction: defects, response, DOS."""

__version__ = "0.1.0"
