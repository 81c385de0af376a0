"""superfield-kit: exact symbolic tools for SUSY vertex algebras and
supercurve coordinate changes."""

__version__ = "0.1.0"
