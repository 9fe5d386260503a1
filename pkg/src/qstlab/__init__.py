"""
qstlab

Simulator and analysis toolkit for the epsilon-secure quantum sequential
transmission protocol: Pauli private quantum channels built from small-bias
key sets, chained across m parties, with exact desk-scale verification of the
security bounds.
"""

__version__ = "1.0.0"

__all__ = ["__version__"]
