"""Wave invariants of bouncing-ball orbits: forward computation and inversion."""
__version__ = "0.1.0"
