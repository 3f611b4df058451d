"""Planning, simulation and verification tools for unitarity randomized benchmarking."""

from . import bounds, channels, clifford, fitting, pauli, protocol, reptheory

__all__ = ["bounds", "channels", "clifford", "fitting", "pauli", "protocol", "reptheory"]
__version__ = "0.1.0"
