"""
Pydantic value types for keys, states, key sets, protocol runs and reports.
"""

from .base import BaseModel
from .keysets import BiasProfile, ChannelSpec, KeySet
from .pauli import PauliKey, PhasedPauli, Phase
from .protocol import CorrelatedKeys, HopRecord, ProtocolConfig, Transcript
from .reports import (
    CertificationResult,
    EpsilonReport,
    HolevoBound,
    HopSecurity,
    ProtocolSecurityReport,
    RunManifest,
    SecurityReport,
)
from .states import DensityMatrix, Ensemble, LogBase, PauliCoefficients, PureState

__all__ = [
    "BaseModel",
    "BiasProfile",
    "CertificationResult",
    "ChannelSpec",
    "CorrelatedKeys",
    "DensityMatrix",
    "Ensemble",
    "EpsilonReport",
    "HolevoBound",
    "HopRecord",
    "HopSecurity",
    "KeySet",
    "LogBase",
    "PauliCoefficients",
    "PauliKey",
    "Phase",
    "PhasedPauli",
    "ProtocolConfig",
    "ProtocolSecurityReport",
    "PureState",
    "RunManifest",
    "SecurityReport",
    "Transcript",
]
