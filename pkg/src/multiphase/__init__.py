"""Quantum Fisher information and phase-precision bounds for multimode optical probes."""
