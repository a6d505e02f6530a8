"""Design-structured measurements: t-designs, entropic uncertainty bounds and
entanglement criteria built on the index of coincidence."""

__version__ = "0.1.0"
