"""
Pauli Key Models

A ``PauliKey`` is a 2n-bit classical key (a, b) naming the n-qubit operator
i^{a*b} X^a Z^b. Bit j of ``a`` and ``b`` refers to qubit j, and qubit 0 is
the most significant bit, both of the integers stored here and of state
amplitude indices.
"""

from enum import IntEnum

from pydantic import Field, model_validator

from .base import BaseModel


class Phase(IntEnum):
    """Unit phase stored as the exponent k of i**k."""

    ONE = 0
    I = 1  # noqa: E741
    MINUS_ONE = 2
    MINUS_I = 3

    @property
    def value_complex(self) -> complex:
        return (1, 1j, -1, -1j)[self.value]

    def __mul__(self, other: object) -> "Phase":
        if isinstance(other, Phase):
            return Phase((self.value + other.value) % 4)
        return NotImplemented

    @property
    def is_real(self) -> bool:
        return self.value % 2 == 0


class PauliKey(BaseModel):
    """
    Classical key (a, b) for one n-qubit Pauli operator.

    ``a`` is the X part, ``b`` the Z part, each an n-bit integer.
    """

    n: int = Field(ge=1, le=32, description="Number of qubits")
    a: int = Field(ge=0, description="X-part bits, qubit 0 most significant")
    b: int = Field(ge=0, description="Z-part bits, qubit 0 most significant")

    @model_validator(mode="after")
    def validate_widths(self) -> "PauliKey":
        limit = 1 << self.n
        if self.a >= limit or self.b >= limit:
            raise ValueError(f"Key parts must fit in {self.n} bits")
        return self

    @classmethod
    def zero(cls, n: int) -> "PauliKey":
        """The identity key."""
        return cls(n=n, a=0, b=0)

    @classmethod
    def from_code(cls, n: int, code: int) -> "PauliKey":
        """Build from the packed 2n-bit integer a||b."""
        if code < 0 or code >= (1 << (2 * n)):
            raise ValueError(f"Code {code} does not fit in {2 * n} bits")
        return cls(n=n, a=code >> n, b=code & ((1 << n) - 1))

    @classmethod
    def from_bits(cls, a: str, b: str) -> "PauliKey":
        """Build from two '0'/'1' strings, first character = qubit 0."""
        if len(a) != len(b):
            raise ValueError("X and Z parts must have the same length")
        return cls(n=len(a), a=int(a, 2), b=int(b, 2))

    @classmethod
    def from_hex(cls, n: int, text: str) -> "PauliKey":
        """Parse the lowercase hex form produced by ``hex``."""
        cleaned = text.strip().lower()
        if cleaned.startswith("0x"):
            cleaned = cleaned[2:]
        try:
            code = int(cleaned, 16)
        except ValueError as e:
            raise ValueError(f"Invalid hex key {text!r}") from e
        return cls.from_code(n, code)

    @property
    def code(self) -> int:
        """Packed integer a||b (a in the high n bits)."""
        return (self.a << self.n) | self.b

    @property
    def hex(self) -> str:
        width = (2 * self.n + 3) // 4
        return format(self.code, f"0{width}x")

    @property
    def a_bits(self) -> str:
        return format(self.a, f"0{self.n}b")

    @property
    def b_bits(self) -> str:
        return format(self.b, f"0{self.n}b")

    @property
    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0

    def __xor__(self, other: "PauliKey") -> "PauliKey":
        if not isinstance(other, PauliKey):
            return NotImplemented
        if other.n != self.n:
            raise ValueError(f"Cannot XOR keys on {self.n} and {other.n} qubits")
        return PauliKey(n=self.n, a=self.a ^ other.a, b=self.b ^ other.b)

    def with_flipped_bit(self, position: int) -> "PauliKey":
        """Flip one bit of the packed code; position 0 is the most significant."""
        if not 0 <= position < 2 * self.n:
            raise ValueError(f"Bit position {position} out of range")
        return PauliKey.from_code(self.n, self.code ^ (1 << (2 * self.n - 1 - position)))

    def __str__(self) -> str:
        return self.hex


class PhasedPauli(BaseModel):
    """A key operator times a unit phase: phase * i^{a*b} X^a Z^b."""

    key: PauliKey
    phase: Phase = Phase.ONE

    @property
    def n(self) -> int:
        return self.key.n
