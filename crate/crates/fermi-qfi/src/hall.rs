//! Quantum-Hall magnetometry (stub).
