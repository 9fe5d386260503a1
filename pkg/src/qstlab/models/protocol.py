"""
Protocol Models

Configuration, correlated keys and transcripts of the m-party sequential
transmission protocol. Nodes are numbered 1..m; hop j carries the state from
node j to node j + 1.
"""

from functools import reduce
from typing import List, Optional

from pydantic import Field, computed_field, field_validator, model_validator

from .base import BaseModel
from .keysets import KeySet
from .pauli import PauliKey, Phase
from .states import PureState


class ProtocolConfig(BaseModel):
    """
    Parameters of one protocol run.

    ``key_sets`` holds one KeySet per hop; when omitted they are sampled and
    certified from ``seed`` at the per-hop threshold.
    """

    m: int = Field(ge=2, le=64, description="Number of parties")
    n: int = Field(ge=1, le=24, description="Qubits per transmitted state")
    epsilon: float = Field(gt=0, le=1, description="Target security parameter")
    key_sets: Optional[List[KeySet]] = Field(
        default=None, description="Per-hop key sets, m - 1 of them"
    )
    seed: int = Field(ge=0, description="Seed for key sampling and key draws")
    taps: List[int] = Field(default_factory=list, description="Hops the adversary copies")
    record_states: bool = Field(
        default=False, description="Keep every hop ciphertext in the transcript"
    )
    max_retries: int = Field(default=50, ge=1, description="Certification attempts per hop")

    @field_validator("taps")
    @classmethod
    def validate_taps(cls, v: List[int]) -> List[int]:
        return sorted(set(v))

    @model_validator(mode="after")
    def validate_key_sets(self) -> "ProtocolConfig":
        if self.key_sets is not None:
            if len(self.key_sets) != self.hop_count:
                raise ValueError(
                    f"Need {self.hop_count} hop key sets for m={self.m}, "
                    f"got {len(self.key_sets)}"
                )
            mismatched = [ks.n for ks in self.key_sets if ks.n != self.n]
            if mismatched:
                raise ValueError(f"Hop key sets must act on n={self.n} qubits")
        return self

    @property
    def hop_count(self) -> int:
        return self.m - 1


class CorrelatedKeys(BaseModel):
    """
    One key per party, K^{A_1} ... K^{A_m}.

    Keys produced by key generation XOR to zero; ``is_balanced`` reports it so
    deliberately broken tuples can still be run.
    """

    keys: List[PauliKey] = Field(min_length=2, description="Key of party 1..m in order")
    provenance: List[int] = Field(
        default_factory=list, description="Index drawn from each hop's key set"
    )

    @model_validator(mode="after")
    def validate_keys(self) -> "CorrelatedKeys":
        if len({key.n for key in self.keys}) != 1:
            raise ValueError("All party keys must act on the same qubit count")
        if self.provenance and len(self.provenance) != len(self.keys) - 1:
            raise ValueError("Provenance needs one index per independent key")
        return self

    @property
    def m(self) -> int:
        return len(self.keys)

    @property
    def n(self) -> int:
        return self.keys[0].n

    @property
    def xor(self) -> PauliKey:
        return reduce(lambda left, right: left ^ right, self.keys)

    @computed_field
    @property
    def is_balanced(self) -> bool:
        """Bitwise XOR of all party keys is the zero string."""
        return self.xor.is_identity

    def with_flipped_bit(self, position: int = 0) -> "CorrelatedKeys":
        """Copy with one bit of the final party's key flipped."""
        keys = list(self.keys)
        keys[-1] = keys[-1].with_flipped_bit(position)
        return CorrelatedKeys(keys=keys, provenance=self.provenance)


class HopRecord(BaseModel):
    """What crossed one link."""

    hop: int = Field(ge=1)
    sender: int = Field(ge=1)
    receiver: int = Field(ge=2)
    ciphertext: Optional[PureState] = Field(
        default=None, description="State on the link, kept when recording is on"
    )
    captured: bool = False


class Transcript(BaseModel):
    """Record of one end-to-end run."""

    m: int
    n: int
    seed: int
    key_hexes: List[str]
    key_provenance: List[int]
    keys_balanced: bool
    net_phase: Phase = Field(description="Phase of the ordered product of party keys")
    net_identity: bool = Field(description="Whether that product has the zero key")
    hops: List[HopRecord]
    captures: List[int] = Field(default_factory=list, description="Tapped hops")
    no_cloning_idealized: bool = Field(
        default=True, description="Tapped ciphertexts were copied, which physics forbids"
    )
    output: PureState
    fidelity: float = Field(ge=0, le=1)
    decoded: bool

    @model_validator(mode="after")
    def validate_hops(self) -> "Transcript":
        if len(self.hops) != self.m - 1:
            raise ValueError(f"Expected {self.m - 1} hop records, got {len(self.hops)}")
        return self
