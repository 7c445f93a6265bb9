"""Pure-dephasing dynamics and geometric discord of two quantum-dot qubits."""
__version__ = "0.1.0"
