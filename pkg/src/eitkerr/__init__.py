"""EIT state transfer with collision-induced Kerr phases: cat states, atom-light
entanglement and entanglement swapping between atom lasers."""

__version__ = "0.1.0"
