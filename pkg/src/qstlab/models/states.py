"""
Quantum State Models

Dense pure states, density matrices and Pauli-basis coefficient vectors.
Amplitude index bits follow the Pauli key convention: qubit 0 is the most
significant bit.
"""

import math
from enum import Enum
from typing import Any, Dict, List, Union

import numpy as np
from pydantic import Field, field_validator, model_serializer, model_validator

from ..config import NORM_TOLERANCE, PSD_TOLERANCE
from .base import BaseModel, complex_parts, frozen_array


class LogBase(str, Enum):
    """Logarithm base for entropies and Holevo quantities."""

    TWO = "2"
    E = "e"

    @classmethod
    def parse(cls, value: Union["LogBase", str, float, int]) -> "LogBase":
        if isinstance(value, LogBase):
            return value
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            if value == 2:
                return cls.TWO
            if math.isclose(value, math.e):
                return cls.E
        if isinstance(value, str) and value.strip().lower() in {"2", "e"}:
            return cls(value.strip().lower())
        raise ValueError(f"Unsupported log base {value!r}; use 2 or e")

    def log(self, x: float) -> float:
        return math.log2(x) if self is LogBase.TWO else math.log(x)


class PureState(BaseModel):
    """Normalised state vector of ``n`` qubits."""

    n: int = Field(ge=1, le=24, description="Number of qubits")
    amplitudes: np.ndarray = Field(description="Complex amplitudes, length 2**n")

    @model_validator(mode="before")
    @classmethod
    def merge_parts(cls, data: Any) -> Any:
        # files carry flat "re" and "im" arrays beside "n"
        parts = isinstance(data, dict) and ("re" in data or "im" in data)
        if parts and "amplitudes" not in data:
            data = dict(data)
            re = np.asarray(data.pop("re", []), dtype=np.float64)
            im = np.asarray(data.pop("im", []), dtype=np.float64)
            if re.shape != im.shape:
                raise ValueError("Real and imaginary parts differ in length")
            data["amplitudes"] = re + 1j * im
        return data

    @field_validator("amplitudes", mode="before")
    @classmethod
    def validate_amplitudes(cls, v: Any) -> np.ndarray:
        array = frozen_array(v, np.complex128)
        if array.ndim != 1:
            raise ValueError("Amplitudes must be a vector")
        return array

    @model_validator(mode="after")
    def validate_state(self) -> "PureState":
        if self.amplitudes.shape[0] != 1 << self.n:
            raise ValueError(
                f"Expected {1 << self.n} amplitudes, got {self.amplitudes.shape[0]}"
            )
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"State is not normalised (norm {norm:.12g})")
        return self

    @property
    def dim(self) -> int:
        return 1 << self.n

    @classmethod
    def basis(cls, n: int, index: int = 0) -> "PureState":
        """Computational basis state |index>."""
        amplitudes = np.zeros(1 << n, dtype=np.complex128)
        amplitudes[index] = 1.0
        return cls(n=n, amplitudes=amplitudes)

    @model_serializer(mode="plain")
    def serialize_state(self) -> Dict[str, Any]:
        return {"n": self.n, **complex_parts(self.amplitudes)}


class DensityMatrix(BaseModel):
    """
    Density matrix of ``n`` qubits.

    Hermitian, unit trace and positive semidefinite, each within 1e-9.
    """

    n: int = Field(ge=1, le=14, description="Number of qubits")
    entries: np.ndarray = Field(description="2**n x 2**n complex matrix")

    @field_validator("entries", mode="before")
    @classmethod
    def validate_entries(cls, v: Any) -> np.ndarray:
        array = frozen_array(v, np.complex128)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError("Density matrix must be square")
        return array

    @model_validator(mode="after")
    def validate_density(self) -> "DensityMatrix":
        dim = 1 << self.n
        if self.entries.shape != (dim, dim):
            raise ValueError(f"Expected a {dim}x{dim} matrix, got {self.entries.shape}")
        if np.max(np.abs(self.entries - self.entries.conj().T)) > PSD_TOLERANCE:
            raise ValueError("Density matrix is not Hermitian")
        trace = complex(np.trace(self.entries))
        if abs(trace - 1.0) > PSD_TOLERANCE:
            raise ValueError(f"Density matrix trace is {trace:.12g}, expected 1")
        lowest = float(np.linalg.eigvalsh(self.entries)[0])
        if lowest < -PSD_TOLERANCE:
            raise ValueError(f"Density matrix has negative eigenvalue {lowest:.3g}")
        return self

    @property
    def dim(self) -> int:
        return 1 << self.n

    @classmethod
    def unchecked(cls, n: int, entries: np.ndarray) -> "DensityMatrix":
        """
        Wrap a matrix already known to be a valid state.

        Used on channel outputs, whose validity follows from the channel being
        a Pauli mixture; skips the eigenvalue check.
        """
        return cls.model_construct(n=n, entries=frozen_array(entries, np.complex128))


class PauliCoefficients(BaseModel):
    """
    Coefficients c[a, b] of rho = 2^-n sum_{a,b} c[a, b] X^a Z^b.

    Stored as a 2**n x 2**n array indexed [a, b]; the flat index a||b equals
    the packed Pauli key code.
    """

    n: int = Field(ge=1, le=14, description="Number of qubits")
    c: np.ndarray = Field(description="Coefficient array indexed [a, b]")

    @field_validator("c", mode="before")
    @classmethod
    def validate_c(cls, v: Any) -> np.ndarray:
        array = np.asarray(v, dtype=np.complex128)
        if array.ndim == 1:
            side = math.isqrt(array.shape[0])
            if side * side == array.shape[0]:
                array = array.reshape(side, side)
        return frozen_array(array, np.complex128)

    @model_validator(mode="after")
    def validate_shape(self) -> "PauliCoefficients":
        dim = 1 << self.n
        if self.c.shape != (dim, dim):
            raise ValueError(f"Expected {dim * dim} coefficients, got shape {self.c.shape}")
        return self

    def at(self, a: int, b: int) -> complex:
        return complex(self.c[a, b])

    @property
    def squared_norm(self) -> float:
        """sum |c|^2, which equals 2^n tr(rho^2)."""
        return float(np.sum(np.abs(self.c) ** 2))


class Ensemble(BaseModel):
    """Weighted family {p_i, rho_i} of states of one dimension."""

    states: List[DensityMatrix] = Field(min_length=1, description="Member states")
    probs: np.ndarray = Field(description="Probabilities, one per state")

    @field_validator("probs", mode="before")
    @classmethod
    def validate_probs(cls, v: Any) -> np.ndarray:
        array = frozen_array(v, np.float64)
        if array.ndim != 1:
            raise ValueError("Probabilities must be a vector")
        if np.any(array < 0):
            raise ValueError("Probabilities must be non-negative")
        if abs(float(array.sum()) - 1.0) > PSD_TOLERANCE:
            raise ValueError(f"Probabilities sum to {float(array.sum()):.12g}, expected 1")
        return array

    @model_validator(mode="after")
    def validate_members(self) -> "Ensemble":
        if self.probs.shape[0] != len(self.states):
            raise ValueError("Need exactly one probability per state")
        if len({state.n for state in self.states}) != 1:
            raise ValueError("Ensemble members must share a dimension")
        return self

    @classmethod
    def uniform(cls, states: List[DensityMatrix]) -> "Ensemble":
        return cls(states=states, probs=np.full(len(states), 1.0 / len(states)))

    @property
    def n(self) -> int:
        return self.states[0].n
