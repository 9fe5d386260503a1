import itertools

import numpy as np
import pytest
from pydantic import ValidationError

from qstlab.core.bits import parity, walsh_hadamard
from qstlab.core.pauli_algebra import (
    apply_key,
    commutes,
    compose,
    compose_all,
    key_label,
    key_matrix,
    phased_matrix,
    star,
    symplectic_sign,
)
from qstlab.core.quantum_state import fidelity, random_pure_state
from qstlab.exceptions import CapExceededError, DimensionMismatchError
from qstlab.models import PauliKey, Phase, PhasedPauli, PureState

X = PauliKey(n=1, a=1, b=0)
Z = PauliKey(n=1, a=0, b=1)
Y = PauliKey(n=1, a=1, b=1)


class TestBits:
    def test_parity_scalar_and_array(self):
        assert parity(0b1011) == 1
        assert parity(0) == 0
        np.testing.assert_array_equal(parity(np.array([0, 1, 3, 7, 2**40 + 1])), [0, 1, 0, 1, 0])

    def test_walsh_hadamard_matches_definition(self, rng):
        values = rng.integers(-5, 5, size=16)
        expected = [
            sum((-1) ** bin(j & k).count("1") * values[j] for j in range(16)) for k in range(16)
        ]
        np.testing.assert_array_equal(walsh_hadamard(values), expected)

    def test_walsh_hadamard_leaves_input_untouched(self):
        values = np.array([1, 0, 0, 0], dtype=np.int64)
        walsh_hadamard(values)
        np.testing.assert_array_equal(values, [1, 0, 0, 0])

    def test_walsh_hadamard_rejects_odd_length(self):
        with pytest.raises(DimensionMismatchError):
            walsh_hadamard(np.ones(6))


class TestKeys:
    def test_hex_width_and_parse(self):
        key = PauliKey(n=4, a=0xA, b=0x3)
        assert key.code == 0xA3
        assert key.hex == "a3"
        assert PauliKey.from_hex(4, "A3") == key
        assert PauliKey(n=1, a=1, b=0).hex == "2"
        assert PauliKey(n=3, a=0, b=1).hex == "01"

    def test_rejects_oversized_parts(self):
        with pytest.raises(ValidationError):
            PauliKey(n=2, a=4, b=0)

    def test_flipped_bit_zero_is_qubit_zero_x_part(self):
        key = PauliKey.zero(3).with_flipped_bit(0)
        assert key.a_bits == "100"
        assert key.b == 0

    def test_label(self):
        assert key_label(PauliKey.from_bits("1010", "0011")) == "XIYZ"
        assert key_label(PauliKey.from_bits("11", "11")) == "-YY"
        assert key_label(PauliKey.from_bits("111", "111")) == "-YYY"
        assert key_label(PauliKey.from_bits("1111", "1111")) == "YYYY"

    def test_label_matches_key_matrix(self):
        single = {
            "I": np.eye(2),
            "X": np.array([[0, 1], [1, 0]]),
            "Z": np.diag([1, -1]),
            "Y": np.array([[0, -1j], [1j, 0]]),
        }
        for code in range(1 << 6):
            key = PauliKey.from_code(3, code)
            label = key_label(key)
            sign = -1 if label.startswith("-") else 1
            expected = sign * np.ones((1, 1))
            for letter in label.lstrip("-"):
                expected = np.kron(expected, single[letter])
            np.testing.assert_allclose(key_matrix(key), expected, atol=1e-12)


class TestSymplectic:
    def test_star(self):
        assert star("101", "110") == 1
        assert star("101", "010") == 0

    def test_star_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            star("10", "1")

    def test_symplectic_sign_matches_matrices(self):
        for u, v, a, b in [("1", "0", "0", "1"), ("0", "1", "1", "0"), ("1", "1", "1", "1")]:
            conj = key_matrix(PauliKey.from_bits(u, v))
            target = key_matrix(PauliKey.from_bits(a, b))
            conjugated = conj @ target @ conj.conj().T
            sign = symplectic_sign(u, v, a, b)
            np.testing.assert_allclose(conjugated, sign * target, atol=1e-12)

    def test_commutes(self):
        assert not commutes(X, Z)
        assert commutes(X, X)
        assert commutes(PauliKey.from_bits("11", "00"), PauliKey.from_bits("00", "11"))


class TestCompose:
    def test_xz_is_minus_i_y(self):
        product = compose(PhasedPauli(key=X), PhasedPauli(key=Z))
        assert product.key == Y
        assert product.phase is Phase.MINUS_I

    def test_zx_is_i_y(self):
        product = compose(PhasedPauli(key=Z), PhasedPauli(key=X))
        assert product.key == Y
        assert product.phase is Phase.I

    def test_compose_matches_matrix_product(self, rng):
        for _ in range(20):
            p = PauliKey.from_code(3, int(rng.integers(0, 64)))
            q = PauliKey.from_code(3, int(rng.integers(0, 64)))
            product = compose(PhasedPauli(key=p), PhasedPauli(key=q))
            np.testing.assert_allclose(
                phased_matrix(product), key_matrix(p) @ key_matrix(q), atol=1e-12
            )

    def test_balanced_product_can_carry_imaginary_phase(self):
        # X, then Z, then Y: keys XOR to zero but Y Z X = i I
        product = compose_all([X, Z, Y])
        assert product.key.is_identity
        assert product.phase is Phase.I
        np.testing.assert_allclose(
            key_matrix(Y) @ key_matrix(Z) @ key_matrix(X), 1j * np.eye(2), atol=1e-12
        )

    def test_compose_all_empty(self):
        with pytest.raises(ValueError):
            compose_all([])

    def test_mismatched_qubit_counts(self):
        with pytest.raises(DimensionMismatchError):
            compose(PhasedPauli(key=X), PhasedPauli(key=PauliKey.zero(2)))


class TestApply:
    def test_apply_matches_dense_matrix(self):
        state = random_pure_state(3, 11)
        for code in range(64):
            key = PauliKey.from_code(3, code)
            out = apply_key(state, key)
            np.testing.assert_allclose(
                out.amplitudes, key_matrix(key) @ state.amplitudes, atol=1e-12
            )
            assert abs(np.linalg.norm(out.amplitudes) - 1.0) < 1e-12

    def test_apply_x_on_qubit_zero_flips_msb(self):
        out = apply_key(PureState.basis(2, 0), PauliKey.from_bits("10", "00"))
        assert abs(out.amplitudes[0b10]) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            apply_key(PureState.basis(2), X)

    def test_key_matrix_respects_cap(self):
        with pytest.raises(CapExceededError):
            key_matrix(PauliKey.zero(11))


class TestMatrices:
    def test_y_key_matrix(self):
        np.testing.assert_allclose(key_matrix(Y), [[0, -1j], [1j, 0]], atol=1e-15)

    def test_keys_are_involutions(self):
        for code in range(16):
            matrix = key_matrix(PauliKey.from_code(2, code))
            np.testing.assert_allclose(matrix @ matrix, np.eye(4), atol=1e-12)
            np.testing.assert_allclose(matrix, matrix.conj().T, atol=1e-12)

    def test_symplectic_sign_exhaustive_single_qubit(self):
        for u, v, a, b in itertools.product("01", repeat=4):
            conj = key_matrix(PauliKey.from_bits(u, v))
            target = key_matrix(PauliKey.from_bits(a, b))
            expected = 1 if np.allclose(conj @ target @ conj.conj().T, target) else -1
            assert symplectic_sign(u, v, a, b) == expected

    def test_symplectic_sign_exhaustive_two_qubits(self):
        labels = [format(x, "02b") for x in range(4)]
        for u, v, a, b in itertools.product(labels, repeat=4):
            conj = key_matrix(PauliKey.from_bits(u, v))
            target = key_matrix(PauliKey.from_bits(a, b))
            sign = symplectic_sign(u, v, a, b)
            np.testing.assert_allclose(conj @ target @ conj.conj().T, sign * target, atol=1e-12)

    def test_self_composition_is_identity(self):
        product = compose(PhasedPauli(key=X), PhasedPauli(key=X))
        assert product.key.is_identity
        assert product.phase is Phase.ONE

    def test_composition_is_associative(self, rng):
        for _ in range(20):
            p, q, r = (
                PhasedPauli(key=PauliKey.from_code(2, int(code)), phase=Phase(int(k)))
                for code, k in zip(rng.integers(0, 16, size=3), rng.integers(0, 4, size=3))
            )
            assert compose(compose(p, q), r) == compose(p, compose(q, r))

    def test_apply_twice_restores_the_state(self):
        state = random_pure_state(3, 2)
        key = PauliKey(n=3, a=5, b=3)
        twice = apply_key(apply_key(state, key), key)
        assert fidelity(state, twice) == pytest.approx(1.0)

    def test_z_on_plus_state(self):
        plus = PureState(n=1, amplitudes=np.array([1, 1]) / np.sqrt(2))
        np.testing.assert_allclose(apply_key(plus, Z).amplitudes, np.array([1, -1]) / np.sqrt(2))
