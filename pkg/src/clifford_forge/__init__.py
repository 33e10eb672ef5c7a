"""Exact construction and analysis of Clifford systems on pseudo-Euclidean space."""

from .exact_core import DenseMatrix, Metric, ScaledVector, SignedPermMatrix, pseudo_inner
from .construction import construct_clifford_system, construct_family, lift_to_clifford_system
from .clifford_system import CliffordSystem, SigmaElement, verify_system

__all__ = [
    "CliffordSystem",
    "DenseMatrix",
    "Metric",
    "ScaledVector",
    "SigmaElement",
    "SignedPermMatrix",
    "construct_clifford_system",
    "construct_family",
    "lift_to_clifford_system",
    "pseudo_inner",
    "verify_system",
]

__version__ = "0.1.0"
