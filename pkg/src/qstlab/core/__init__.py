"""Numeric kernels: Pauli algebra, dense states, randomizing channels, Holevo accounting."""
