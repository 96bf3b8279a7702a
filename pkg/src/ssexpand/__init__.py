"""ssexpand: small-set expansion, robustness of stabilizer LTCs, and commuting local Hamiltonians."""

__version__ = "0.1.0"
