"""exboot - multiplier-bootstrap inference for exchangeable arrays."""

__version__ = "0.1.0"
