"""Desk-scale simulator of the two-qubit Wigner's-friend experiment built on
the Hardy state: exact measurement-context tables, discrete pilot-wave
trajectory sets under rival foliations, quantum-memory erasure versus
decoherence, agent-inference replay, and CHSH statistics against a local
hidden-variable model."""

from . import bohm, epistemic, hardy, memory, qcore

__all__ = ["bell", "bohm", "cli", "epistemic", "hardy", "memory", "qcore"]
__version__ = "0.1.0"
