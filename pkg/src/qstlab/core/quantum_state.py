"""
Dense states, norms, entropy and the Pauli-basis decomposition.

Hermitian eigendecomposition is the single numeric kernel behind trace norm
and entropy. The decomposition uses one Walsh-Hadamard transform per X-part,
so it costs O(4^n n) instead of one trace per coefficient.
"""

from typing import Union

import numpy as np

from ..config import EIGENVALUE_CLAMP, PSD_TOLERANCE, get_settings
from ..exceptions import CapExceededError, DimensionMismatchError
from ..models.states import DensityMatrix, LogBase, PauliCoefficients, PureState
from .bits import make_rng, walsh_hadamard


def _check_cap(n: int) -> None:
    cap = get_settings().dense_cap
    if n > cap:
        raise CapExceededError(f"Dense work limited to n <= {cap}, got {n}")


def random_pure_state(n: int, seed: Union[int, np.random.Generator]) -> PureState:
    """
    Haar-distributed pure state from normalised complex Gaussian draws.

    ``seed`` may be an integer or an existing generator, whose stream is then
    advanced.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_cap(n)
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed, "state")
    dim = 1 << n
    vector = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(n=n, amplitudes=vector / np.linalg.norm(vector))


def density_from_pure(state: PureState) -> DensityMatrix:
    """Rank-one projector |psi><psi|."""
    _check_cap(state.n)
    psi = state.amplitudes
    return DensityMatrix(n=state.n, entries=np.outer(psi, psi.conj()))


def maximally_mixed(n: int) -> DensityMatrix:
    _check_cap(n)
    dim = 1 << n
    return DensityMatrix(n=n, entries=np.eye(dim, dtype=np.complex128) / dim)


def _as_matrix(m: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    return m.entries if isinstance(m, DensityMatrix) else np.asarray(m, dtype=np.complex128)


def _is_hermitian(matrix: np.ndarray) -> bool:
    return bool(np.max(np.abs(matrix - matrix.conj().T), initial=0.0) <= PSD_TOLERANCE)


def trace_norm(m: Union[DensityMatrix, np.ndarray]) -> float:
    """Sum of singular values, tr sqrt(M^dagger M)."""
    matrix = _as_matrix(m)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"trace_norm needs a square matrix, got {matrix.shape}")
    if _is_hermitian(matrix):
        return float(np.sum(np.abs(np.linalg.eigvalsh(matrix))))
    return float(np.sum(np.linalg.svd(matrix, compute_uv=False)))


def frobenius_norm(m: Union[DensityMatrix, np.ndarray]) -> float:
    """sqrt tr(M^dagger M)."""
    return float(np.linalg.norm(_as_matrix(m), "fro"))


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2), equal to the squared Frobenius norm for Hermitian rho."""
    return float(np.real(np.vdot(rho.entries, rho.entries)))


def distance_to_mixed(rho: Union[DensityMatrix, np.ndarray]) -> float:
    """Trace distance ||rho - 1/d||_1 used throughout the security checks."""
    matrix = _as_matrix(rho)
    dim = matrix.shape[0]
    return trace_norm(matrix - np.eye(dim) / dim)


def von_neumann_entropy(
    rho: DensityMatrix, base: Union[LogBase, str, float] = LogBase.TWO
) -> float:
    """
    S(rho) = -tr rho log rho.

    Eigenvalues below 1e-15 are treated as zero.
    """
    log_base = LogBase.parse(base)
    eigenvalues = np.linalg.eigvalsh(rho.entries)
    eigenvalues = eigenvalues[eigenvalues > EIGENVALUE_CLAMP]
    logs = np.log2(eigenvalues) if log_base is LogBase.TWO else np.log(eigenvalues)
    return max(0.0, float(-np.sum(eigenvalues * logs)))


def fidelity(psi: PureState, phi: PureState) -> float:
    """|<psi|phi>|^2, blind to global phase."""
    if psi.n != phi.n:
        raise DimensionMismatchError(f"States on {psi.n} and {phi.n} qubits")
    overlap = np.vdot(psi.amplitudes, phi.amplitudes)
    return float(min(1.0, abs(overlap) ** 2))


def tensor(rho: DensityMatrix, sigma: DensityMatrix) -> DensityMatrix:
    """rho (x) sigma, rho on the leading qubits."""
    _check_cap(rho.n + sigma.n)
    return DensityMatrix(n=rho.n + sigma.n, entries=np.kron(rho.entries, sigma.entries))


def decompose_matrix(matrix: np.ndarray) -> np.ndarray:
    """
    Coefficients c[a, b] = tr(M Z^b X^a) of any square 2^n matrix.

    For fixed a, c[a, b] = sum_j M[j^a, j] (-1)^{|j & b|}, a Walsh-Hadamard
    transform over j of the a-th shifted diagonal.
    """
    dim = matrix.shape[0]
    j = np.arange(dim, dtype=np.int64)
    shifted = matrix[j[None, :] ^ j[:, None], j[None, :]]
    return walsh_hadamard(shifted, axis=1)


def reconstruct_matrix(c: np.ndarray) -> np.ndarray:
    """Inverse of ``decompose_matrix``: M = 2^-n sum c[a, b] X^a Z^b."""
    dim = c.shape[0]
    j = np.arange(dim, dtype=np.int64)
    shifted = walsh_hadamard(np.asarray(c, dtype=np.complex128), axis=1) / dim
    matrix = np.empty((dim, dim), dtype=np.complex128)
    matrix[j[None, :] ^ j[:, None], j[None, :]] = shifted
    return matrix


def pauli_decompose(rho: DensityMatrix) -> PauliCoefficients:
    """Expansion rho = 2^-n sum_{a,b} c[a, b] X^a Z^b."""
    _check_cap(rho.n)
    return PauliCoefficients(n=rho.n, c=decompose_matrix(rho.entries))


def pauli_reconstruct(coefficients: PauliCoefficients) -> DensityMatrix:
    """Density matrix from its Pauli coefficients."""
    _check_cap(coefficients.n)
    return DensityMatrix(n=coefficients.n, entries=reconstruct_matrix(coefficients.c))

