"""
Key Set Models

A ``KeySet`` is the ordered multiset E of 2n-bit Pauli keys that defines the
random-Pauli channel R_E. Keys are held as packed integer codes a||b so that
sets with millions of entries stay cheap; ``keys`` expands them on demand.
"""

from typing import Any, List, Optional, Sequence

import numpy as np
from pydantic import Field, computed_field, field_validator, model_validator

from .base import BaseModel, frozen_array
from .pauli import PauliKey


class KeySet(BaseModel):
    """
    Ordered multiset of Pauli keys sharing one qubit count.

    Duplicates are allowed; ``is_unique`` records whether any occur.
    """

    n: int = Field(ge=1, le=31, description="Number of qubits")
    codes: np.ndarray = Field(description="Packed key codes a||b, int64")
    epsilon: Optional[float] = Field(
        default=None, gt=0, le=1, description="Target security parameter, if any"
    )
    certified: bool = Field(
        default=False, description="Whether beta_max met the certification threshold"
    )
    beta_max: Optional[float] = Field(
        default=None, ge=0, le=1, description="Largest nontrivial bias, if computed"
    )

    @field_validator("codes", mode="before")
    @classmethod
    def validate_codes(cls, v: Any) -> np.ndarray:
        array = np.asarray(v)
        if array.ndim != 1:
            raise ValueError("Key codes must form a flat sequence")
        if array.shape[0] == 0:
            raise ValueError("A key set needs at least one key")
        if array.dtype.kind not in "iu":
            raise ValueError("Key codes must be integers")
        return frozen_array(array, np.int64)

    @model_validator(mode="after")
    def validate_range(self) -> "KeySet":
        if int(self.codes.min()) < 0 or int(self.codes.max()) >= (1 << (2 * self.n)):
            raise ValueError(f"Key codes must fit in {2 * self.n} bits")
        return self

    @classmethod
    def from_keys(cls, keys: Sequence[PauliKey], **metadata: Any) -> "KeySet":
        if not keys:
            raise ValueError("A key set needs at least one key")
        n = keys[0].n
        if any(key.n != n for key in keys):
            raise ValueError("All keys in a set must share the qubit count")
        return cls(n=n, codes=np.array([key.code for key in keys], dtype=np.int64), **metadata)

    @computed_field
    @property
    def size(self) -> int:
        """s = |E| counted with multiplicity."""
        return int(self.codes.shape[0])

    @computed_field
    @property
    def is_unique(self) -> bool:
        return int(np.unique(self.codes).shape[0]) == self.size

    @property
    def keys(self) -> List[PauliKey]:
        return [PauliKey.from_code(self.n, int(code)) for code in self.codes]

    def key(self, index: int) -> PauliKey:
        return PauliKey.from_code(self.n, int(self.codes[index]))

    def multiplicities(self) -> np.ndarray:
        """Count of each of the 4**n possible codes in the set."""
        return np.bincount(self.codes, minlength=1 << (2 * self.n)).astype(np.int64)

    def distinct_with_counts(self) -> tuple:
        """Distinct codes in ascending order and their multiplicities."""
        codes, counts = np.unique(self.codes, return_counts=True)
        return codes, counts

    def with_certificate(
        self, epsilon: Optional[float], certified: bool, beta_max: Optional[float]
    ) -> "KeySet":
        return self.model_copy(
            update={"epsilon": epsilon, "certified": certified, "beta_max": beta_max}
        )


class BiasProfile(BaseModel):
    """
    Bias of a key set against every string (a, b).

    ``beta`` is indexed by the packed code a||b. ``signed`` keeps the
    character sums before the absolute value.
    """

    n: int = Field(ge=1, le=31, description="Number of qubits")
    signed: np.ndarray = Field(description="Signed character sums / s, by code a||b")

    @field_validator("signed", mode="before")
    @classmethod
    def validate_signed(cls, v: Any) -> np.ndarray:
        return frozen_array(v, np.float64)

    @model_validator(mode="after")
    def validate_profile(self) -> "BiasProfile":
        if self.signed.shape != (1 << (2 * self.n),):
            raise ValueError("Profile length must be 4**n")
        if abs(self.signed[0] - 1.0) > 1e-12:
            raise ValueError("Bias at the zero string must be 1")
        if np.max(np.abs(self.signed)) > 1.0 + 1e-12:
            raise ValueError("Biases must lie in [0, 1]")
        return self

    @property
    def beta(self) -> np.ndarray:
        return np.abs(self.signed)

    @computed_field
    @property
    def beta_max(self) -> float:
        """max |bias| over nonzero strings (0 for a one-point space)."""
        if self.signed.shape[0] <= 1:
            return 0.0
        return float(np.max(np.abs(self.signed[1:])))

    def at(self, a: int, b: int) -> float:
        return float(abs(self.signed[(a << self.n) | b]))


class ChannelSpec(BaseModel):
    """Ordered hops R_{E_1}, ..., R_{E_m}; applied first to last."""

    hops: List[KeySet] = Field(min_length=1, description="Key set per hop")

    @model_validator(mode="after")
    def validate_hops(self) -> "ChannelSpec":
        qubit_counts = {hop.n for hop in self.hops}
        if len(qubit_counts) != 1:
            raise ValueError(f"All hops must share n, got {sorted(qubit_counts)}")
        return self

    @classmethod
    def single(cls, key_set: KeySet) -> "ChannelSpec":
        return cls(hops=[key_set])

    @property
    def n(self) -> int:
        return self.hops[0].n

    @property
    def m(self) -> int:
        return len(self.hops)

    def prefix(self, hops: int) -> "ChannelSpec":
        """The first ``hops`` maps."""
        if not 1 <= hops <= self.m:
            raise ValueError(f"Prefix length {hops} outside 1..{self.m}")
        return ChannelSpec(hops=self.hops[:hops])
