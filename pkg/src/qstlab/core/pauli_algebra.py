"""
Pauli algebra on 2n-bit keys.

Operators are P_K = i^{a*b} X^a Z^b for K = (a, b). Phases are tracked exactly
as powers of i. State application permutes and signs amplitudes in O(2^n)
without building a matrix.
"""

from typing import Iterable, Optional

import numpy as np

from ..config import get_settings
from ..exceptions import CapExceededError, DimensionMismatchError
from ..models.pauli import PauliKey, Phase, PhasedPauli
from ..models.states import PureState
from .bits import bits_to_int, check_same_length, parity, parity_sign

_LABELS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


def star(x: str, y: str) -> int:
    """Inner product sum_j x_j y_j mod 2 of two equal-length bit strings."""
    check_same_length(x, y)
    return parity(bits_to_int(x) & bits_to_int(y))


def symplectic_sign(u: str, v: str, a: str, b: str) -> int:
    """
    Sign s with X^u Z^v (X^a Z^b) Z^v X^u = s X^a Z^b.

    Equals (-1)^{a*v + b*u}.
    """
    check_same_length(u, v, a, b)
    return conjugation_sign(bits_to_int(u), bits_to_int(v), bits_to_int(a), bits_to_int(b))


def conjugation_sign(u: int, v: int, a: int, b: int) -> int:
    """Integer form of ``symplectic_sign``."""
    return parity_sign((a & v) ^ (b & u))


def commutes(p: PauliKey, q: PauliKey) -> bool:
    """Whether the two key operators commute."""
    _check_same_n(p.n, q.n)
    return conjugation_sign(p.a, p.b, q.a, q.b) == 1


def _check_same_n(*counts: int) -> None:
    if len(set(counts)) != 1:
        raise DimensionMismatchError(f"Operands act on different qubit counts: {counts}")


def compose(p: PhasedPauli, q: PhasedPauli) -> PhasedPauli:
    """
    Operator product p . q (q acts first).

    X^{a1}Z^{b1} X^{a2}Z^{b2} = (-1)^{b1*a2} X^{a1^a2} Z^{b1^b2}; the i^{a*b}
    factors of both inputs and the output are folded into the phase exponent.
    """
    _check_same_n(p.n, q.n)
    a1, b1 = p.key.a, p.key.b
    a2, b2 = q.key.a, q.key.b
    a3, b3 = a1 ^ a2, b1 ^ b2
    exponent = (
        p.phase.value
        + q.phase.value
        + parity(a1 & b1)
        + parity(a2 & b2)
        + 2 * parity(b1 & a2)
        - parity(a3 & b3)
    )
    return PhasedPauli(key=PauliKey(n=p.n, a=a3, b=b3), phase=Phase(exponent % 4))


def compose_all(keys: Iterable[PauliKey]) -> PhasedPauli:
    """
    Product of keys applied in iteration order.

    The first key acts first, so the result is P_{K_last} ... P_{K_first}.
    """
    result: Optional[PhasedPauli] = None
    for key in keys:
        step = PhasedPauli(key=key)
        result = step if result is None else compose(step, result)
    if result is None:
        raise ValueError("compose_all needs at least one key")
    return result


def key_label(key: PauliKey) -> str:
    """
    Tensor label such as 'XIZY', qubit 0 first.

    Each Y is iXZ, so with p Y factors P_K = (-1)^(p // 2) times the tensor
    product; a leading '-' marks the negative case.
    """
    labels = "".join(
        _LABELS[(int(xa), int(zb))] for xa, zb in zip(key.a_bits, key.b_bits)
    )
    ys = bin(key.a & key.b).count("1")
    return "-" + labels if (ys // 2) % 2 else labels


def _check_state(state: PureState, key: PauliKey) -> None:
    if state.n != key.n:
        raise DimensionMismatchError(
            f"State has {state.n} qubits but key acts on {key.n}"
        )


def apply_key_vector(amplitudes: np.ndarray, key: PauliKey) -> np.ndarray:
    """
    P_K applied to a raw amplitude vector.

    out[j] = i^{a*b} (-1)^{popcount((j^a) & b)} psi[j^a].
    """
    indices = np.arange(amplitudes.shape[0], dtype=np.int64) ^ key.a
    signs = parity_sign(indices & key.b)
    phase = Phase(parity(key.a & key.b)).value_complex
    return phase * signs * amplitudes[indices]


def apply_key(state: PureState, key: PauliKey) -> PureState:
    """Encode ``state`` with P_K; the norm is preserved exactly up to rounding."""
    _check_state(state, key)
    return PureState(n=state.n, amplitudes=apply_key_vector(state.amplitudes, key))


def apply_phased(state: PureState, op: PhasedPauli) -> PureState:
    """Apply phase * P_K."""
    _check_state(state, op.key)
    out = op.phase.value_complex * apply_key_vector(state.amplitudes, op.key)
    return PureState(n=state.n, amplitudes=out)


def key_matrix(key: PauliKey) -> np.ndarray:
    """
    Dense 2^n x 2^n matrix of i^{a*b} X^a Z^b.

    Only for n up to the configured dense cap.
    """
    cap = get_settings().dense_cap
    if key.n > cap:
        raise CapExceededError(f"key_matrix needs n <= {cap}, got {key.n}")
    dim = 1 << key.n
    columns = np.arange(dim, dtype=np.int64)
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    # column j holds P_K |j> = i^{a*b} (-1)^{|j & b|} |j ^ a>
    phase = Phase(parity(key.a & key.b)).value_complex
    matrix[columns ^ key.a, columns] = phase * parity_sign(columns & key.b)
    return matrix


def phased_matrix(op: PhasedPauli) -> np.ndarray:
    return op.phase.value_complex * key_matrix(op.key)
