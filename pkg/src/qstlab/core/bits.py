"""
Bit-level kernels.

Vectorised parity, the in-place fast Walsh-Hadamard transform and the seeded
random streams every stochastic routine draws from.
"""

import zlib
from typing import Union

import numpy as np

from ..exceptions import DimensionMismatchError

IntArray = Union[int, np.ndarray]


def parity(x: IntArray) -> IntArray:
    """Parity of the set bits of ``x`` (elementwise for arrays, < 2**64)."""
    if isinstance(x, (int, np.integer)):
        return bin(int(x)).count("1") & 1
    y = np.asarray(x, dtype=np.uint64).copy()
    for shift in (32, 16, 8, 4, 2, 1):
        y ^= y >> np.uint64(shift)
    return (y & np.uint64(1)).astype(np.int64)


def parity_sign(x: IntArray) -> IntArray:
    """(-1) raised to the parity of ``x``."""
    return 1 - 2 * parity(x)


def bits_to_int(bits: str) -> int:
    """Read a '0'/'1' string with its first character as the most significant bit."""
    if not bits or any(ch not in "01" for ch in bits):
        raise ValueError(f"Not a bit string: {bits!r}")
    return int(bits, 2)


def int_to_bits(value: int, width: int) -> str:
    """Inverse of ``bits_to_int`` at a fixed width."""
    if value < 0 or value >= (1 << width):
        raise ValueError(f"{value} does not fit in {width} bits")
    return format(value, f"0{width}b") if width else ""


def check_same_length(*strings: str) -> int:
    """Return the common length of bit strings, raising if they differ."""
    lengths = {len(s) for s in strings}
    if len(lengths) != 1:
        raise DimensionMismatchError(
            f"Bit strings have different lengths: {sorted(lengths)}"
        )
    return lengths.pop()


def walsh_hadamard(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """
    Unnormalised Walsh-Hadamard transform along ``axis``.

    ``out[k] = sum_j (-1)^{popcount(j & k)} values[j]`` in natural (Sylvester)
    order. The axis length must be a power of two. The input is not modified.
    """
    data = np.moveaxis(np.asarray(values), axis, -1)
    data = np.array(data, dtype=np.result_type(data.dtype, np.int64), order="C")
    shape = data.shape
    length = shape[-1]
    if length & (length - 1):
        raise DimensionMismatchError(f"Transform length {length} is not a power of two")

    h = 1
    while h < length:
        view = data.reshape(shape[:-1] + (length // (2 * h), 2, h))
        low = view[..., 0, :].copy()
        high = view[..., 1, :]
        view[..., 0, :] = low + high
        view[..., 1, :] = low - high
        data = view.reshape(shape)
        h *= 2

    return np.moveaxis(data, -1, axis)


def make_rng(seed: int, *tags: str) -> np.random.Generator:
    """
    Counter-based generator for ``seed`` and an optional stream path.

    Streams derived from the same seed with different tags are independent;
    tags are hashed with crc32 so derivation is stable across processes.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    entropy.extend(zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF for tag in tags)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
