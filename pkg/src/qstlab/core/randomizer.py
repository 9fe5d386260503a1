"""
Small-bias key sets and the random-Pauli channels they define.

R_E(rho) = 1/|E| sum_{(u,v) in E} X^u Z^v rho Z^v X^u multiplies the Pauli
coefficient c[a, b] of rho by the signed character mean
E_{(u,v)} (-1)^{a*v + b*u}. That mean is the bias profile of E read at the
swapped string (b, a), so the channel is fully described by one
Walsh-Hadamard transform of the multiplicity vector of E.
"""

import logging
import math
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from ..config import get_settings
from ..exceptions import CapExceededError, CertificationError, DimensionMismatchError
from ..models.keysets import BiasProfile, ChannelSpec, KeySet
from ..models.pauli import PauliKey
from ..models.reports import CertificationResult, EpsilonReport
from ..models.states import DensityMatrix, PureState
from .bits import bits_to_int, make_rng, parity_sign, walsh_hadamard
from .parallel import parallel_map
from .quantum_state import (
    decompose_matrix,
    distance_to_mixed,
    random_pure_state,
    reconstruct_matrix,
)

logger = logging.getLogger(__name__)

Channel = Union[KeySet, ChannelSpec]
BitArg = Union[int, str]


def full_key_set(n: int) -> KeySet:
    """All 4^n keys once each: the completely randomizing channel."""
    _check_transform_cap(n)
    return KeySet(n=n, codes=np.arange(1 << (2 * n), dtype=np.int64))


def singleton_key_set(key: PauliKey) -> KeySet:
    return KeySet(n=key.n, codes=np.array([key.code], dtype=np.int64))


def as_spec(channel: Channel) -> ChannelSpec:
    return channel if isinstance(channel, ChannelSpec) else ChannelSpec.single(channel)


def _check_transform_cap(n: int) -> None:
    cap = get_settings().transform_cap
    if 2 * n > cap:
        raise CapExceededError(f"Bias transform limited to 2n <= {cap}, got 2n = {2 * n}")


def _check_dense_cap(n: int) -> None:
    cap = get_settings().dense_cap
    if n > cap:
        raise CapExceededError(f"Dense work limited to n <= {cap}, got {n}")


def _bit_arg(value: BitArg, n: int) -> int:
    if isinstance(value, str):
        if len(value) != n:
            raise DimensionMismatchError(f"Expected a {n}-bit string, got {value!r}")
        return bits_to_int(value)
    if not 0 <= value < (1 << n):
        raise DimensionMismatchError(f"{value} does not fit in {n} bits")
    return int(value)


# Bias ------------------------------------------------------------------------


def signed_bias(key_set: KeySet, a: BitArg, b: BitArg) -> float:
    """E_{x in E} (-1)^{x*(a,b)} summed exactly before the single division."""
    code = (_bit_arg(a, key_set.n) << key_set.n) | _bit_arg(b, key_set.n)
    total = int(np.sum(parity_sign(key_set.codes & code)))
    return float(Fraction(total, key_set.size))


def bias(key_set: KeySet, a: BitArg, b: BitArg) -> float:
    """Bias(E, (a, b)) = |E_{x in E} (-1)^{x*(a,b)}|."""
    return abs(signed_bias(key_set, a, b))


def bias_profile(key_set: KeySet) -> BiasProfile:
    """Signed character means at every (a, b) via one 4^n-point transform."""
    _check_transform_cap(key_set.n)
    sums = walsh_hadamard(key_set.multiplicities())
    return BiasProfile(n=key_set.n, signed=sums / key_set.size)


def bias_profile_direct(key_set: KeySet, chunk_elements: int = 1 << 22) -> BiasProfile:
    """
    Same profile by direct enumeration over keys and strings.

    x*(a,b) is computed as a bit-matrix product; the character sums are exact
    integers before division.
    """
    _check_transform_cap(key_set.n)
    width = 2 * key_set.n
    total = 1 << width
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    key_bits = ((key_set.codes[:, None] >> shifts[None, :]) & 1).astype(np.float64)
    chunk = max(1, chunk_elements // key_set.size)
    sums = np.empty(total, dtype=np.int64)
    for start in range(0, total, chunk):
        strings = np.arange(start, min(total, start + chunk), dtype=np.int64)
        string_bits = ((strings[None, :] >> shifts[:, None]) & 1).astype(np.float64)
        dots = (key_bits @ string_bits).astype(np.int64)
        sums[start : start + strings.shape[0]] = np.sum(1 - 2 * (dots & 1), axis=0)
    return BiasProfile(n=key_set.n, signed=sums / key_set.size)


def channel_bias(key_set: KeySet) -> np.ndarray:
    """
    Multiplier applied by R_E to c[a, b], as a 2^n x 2^n array.

    Entry [a, b] is E_{(u,v)} (-1)^{a*v + b*u}, the signed profile at (b, a).
    """
    dim = 1 << key_set.n
    return bias_profile(key_set).signed.reshape(dim, dim).T.copy()


def composed_channel_bias(spec: ChannelSpec) -> np.ndarray:
    """Multiplier of R_{E_m} o ... o R_{E_1}: the pointwise product over hops."""
    multiplier = channel_bias(spec.hops[0])
    for hop in spec.hops[1:]:
        multiplier = multiplier * channel_bias(hop)
    return multiplier


def nontrivial_max(multiplier: np.ndarray) -> float:
    """max |multiplier| excluding the identity coefficient [0, 0]."""
    flat = np.abs(multiplier).ravel()
    return float(np.max(flat[1:])) if flat.shape[0] > 1 else 0.0


# Channel application ----------------------------------------------------------


def _check_state_n(key_set_n: int, rho: DensityMatrix) -> None:
    if key_set_n != rho.n:
        raise DimensionMismatchError(
            f"Channel acts on {key_set_n} qubits but state has {rho.n}"
        )


def conjugate_average(key_set: KeySet, matrix: np.ndarray) -> np.ndarray:
    """(1/s) sum X^u Z^v M Z^v X^u, one pass per distinct key."""
    dim = matrix.shape[0]
    index = np.arange(dim, dtype=np.int64)
    mask = dim - 1
    out = np.zeros((dim, dim), dtype=np.complex128)
    codes, counts = key_set.distinct_with_counts()
    for code, count in zip(codes.tolist(), counts.tolist()):
        u, v = code >> key_set.n, code & mask
        signs = parity_sign(index & v)
        dephased = matrix * np.outer(signs, signs)
        flipped = index ^ u
        out += count * dephased[np.ix_(flipped, flipped)]
    return out / key_set.size


def channel_apply_average(key_set: KeySet, rho: DensityMatrix) -> DensityMatrix:
    """R_E(rho) by explicit averaging over the conjugations."""
    _check_state_n(key_set.n, rho)
    _check_dense_cap(rho.n)
    return DensityMatrix(n=rho.n, entries=conjugate_average(key_set, rho.entries))


def apply_multiplier(multiplier: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Scale Pauli coefficients of ``matrix`` by ``multiplier`` and rebuild."""
    return reconstruct_matrix(decompose_matrix(matrix) * multiplier)


def channel_apply_spectral(key_set: KeySet, rho: DensityMatrix) -> DensityMatrix:
    """R_E(rho) in the Pauli basis: c[a, b] -> c[a, b] * beta[a, b]."""
    _check_state_n(key_set.n, rho)
    _check_dense_cap(rho.n)
    return DensityMatrix(
        n=rho.n, entries=apply_multiplier(channel_bias(key_set), rho.entries)
    )


def compose_apply(spec: ChannelSpec, rho: DensityMatrix, method: str = "spectral") -> DensityMatrix:
    """
    (R_{E_m} o ... o R_{E_1})(rho).

    ``spectral`` multiplies once by the composed bias; ``sequential`` applies
    each hop in turn by averaging.
    """
    _check_state_n(spec.n, rho)
    _check_dense_cap(rho.n)
    if method == "spectral":
        entries = apply_multiplier(composed_channel_bias(spec), rho.entries)
    elif method == "sequential":
        entries = rho.entries
        for hop in spec.hops:
            entries = conjugate_average(hop, entries)
    else:
        raise ValueError(f"Unknown composition method {method!r}")
    return DensityMatrix(n=rho.n, entries=entries)


# Key lengths and thresholds ---------------------------------------------------


def _check_epsilon(epsilon: float) -> None:
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")


def dn_key_length(n: int, epsilon: float) -> int:
    """ceil(n + 2 log2(1/eps) + 4) key bits, so |E| = 2^result."""
    _check_epsilon(epsilon)
    if n < 1:
        raise ValueError("n must be at least 1")
    exact = n + 2 * math.log2(1 / epsilon) + 4
    # guard against log2 rounding just above an integer
    return int(math.ceil(exact - 1e-9))


def certification_threshold(n: int, epsilon: float) -> float:
    """Bias bound eps * 2^(-n/2) that certifies an eps-randomizer."""
    _check_epsilon(epsilon)
    return epsilon * 2 ** (-n / 2)


def per_hop_threshold(n: int, epsilon: float, m: int) -> float:
    """Per-hop bias bound eps^(1/m) * 2^(-n/(2m)) for an m-party chain."""
    _check_epsilon(epsilon)
    if m < 1:
        raise ValueError("m must be at least 1")
    return epsilon ** (1 / m) * 2 ** (-n / (2 * m))


def frobenius_certificate(n: int, beta_max: float) -> Tuple[float, float]:
    """
    Worst-case output purity and trace distance for pure inputs.

    With sum_{(a,b) != 0} |c|^2 = 2^n - 1 for a pure state,
    ||R(rho)||_2^2 <= (1 + beta_max^2 (2^n - 1)) / 2^n and the chain bound
    gives ||R(rho) - 1/d||_1 <= beta_max sqrt(2^n - 1).
    """
    dim = 1 << n
    purity_bound = (1 + beta_max**2 * (dim - 1)) / dim
    return purity_bound, beta_max * math.sqrt(dim - 1)


# Sampling --------------------------------------------------------------------


def sample_and_certify(
    n: int,
    epsilon: float,
    seed: int,
    max_retries: int = 50,
    threshold: Optional[float] = None,
    key_count: Optional[int] = None,
) -> CertificationResult:
    """
    Draw key sets uniformly with replacement until one is certified.

    Each attempt draws ``key_count`` keys (default 2^dn_key_length) and accepts
    when beta_max <= threshold (default eps * 2^(-n/2)). Raises
    ``CertificationError`` with the best set seen once ``max_retries``
    attempts fail.
    """
    _check_epsilon(epsilon)
    _check_transform_cap(n)
    count = key_count if key_count is not None else 1 << dn_key_length(n, epsilon)
    if count < 1:
        raise ValueError("key_count must be positive")
    limit = threshold if threshold is not None else certification_threshold(n, epsilon)
    attempts = max(1, max_retries)
    rng = make_rng(seed, "certify", str(n))

    best: Optional[Tuple[KeySet, BiasProfile]] = None
    for attempt in range(1, attempts + 1):
        codes = rng.integers(0, 1 << (2 * n), size=count, dtype=np.int64)
        key_set = KeySet(n=n, codes=codes)
        profile = bias_profile(key_set)
        if best is None or profile.beta_max < best[1].beta_max:
            best = (key_set, profile)
        if profile.beta_max <= limit:
            logger.info(
                f"Certified {count} keys for n={n} on attempt {attempt}: "
                f"beta_max={profile.beta_max:.6g} <= {limit:.6g}"
            )
            return CertificationResult(
                key_set=key_set.with_certificate(epsilon, True, profile.beta_max),
                profile=profile,
                attempts=attempt,
                threshold=limit,
            )
        logger.debug(f"Attempt {attempt}: beta_max={profile.beta_max:.6g} > {limit:.6g}")

    assert best is not None
    best_set, best_profile = best
    logger.warning(
        f"Certification failed for n={n}, eps={epsilon} after {attempts} attempts; "
        f"best beta_max={best_profile.beta_max:.6g}, threshold={limit:.6g}"
    )
    raise CertificationError(
        f"No key set of size {count} reached bias <= {limit:.6g} "
        f"(best {best_profile.beta_max:.6g}) in {attempts} attempts",
        best_beta_max=best_profile.beta_max,
        threshold=limit,
        attempts=attempts,
        best_key_set=best_set.with_certificate(epsilon, False, best_profile.beta_max),
    )


def sample_hop_sets(
    n: int,
    epsilon: float,
    m: int,
    seed: int,
    max_retries: int = 50,
    key_count: Optional[int] = None,
) -> List[CertificationResult]:
    """Certified key sets for the m - 1 hops of an m-party chain."""
    if m < 2:
        raise ValueError("A chain needs at least two parties")
    threshold = per_hop_threshold(n, epsilon, m)
    results = []
    for hop in range(1, m):
        hop_seed = int(make_rng(seed, "hop", str(hop)).integers(0, 2**63 - 1))
        results.append(
            sample_and_certify(
                n, epsilon, hop_seed, max_retries, threshold=threshold, key_count=key_count
            )
        )
    return results


# Verification -----------------------------------------------------------------


def verify_epsilon(
    channel: Channel, epsilon: float, trials: int = 500, seed: int = 0
) -> EpsilonReport:
    """
    Certificate and Monte-Carlo evidence that ``channel`` is eps-randomizing.

    The Monte-Carlo part draws ``trials`` Haar-random pure states and records
    the worst trace distance to 1/d, checking the chain
    ||R(rho) - 1/d||_1 <= sqrt(2^n ||R(rho)||_2^2 - 1) at every sample.
    """
    _check_epsilon(epsilon)
    spec = as_spec(channel)
    n = spec.n
    _check_dense_cap(n)
    dim = 1 << n

    multiplier = composed_channel_bias(spec)
    beta_max = nontrivial_max(multiplier)
    threshold = certification_threshold(n, epsilon)
    certified = beta_max <= threshold
    purity_bound, trace_bound = frobenius_certificate(n, beta_max)

    rng = make_rng(seed, "verify")
    states = [random_pure_state(n, rng) for _ in range(trials)]

    def measure(state: PureState) -> Tuple[float, float]:
        psi = state.amplitudes
        output = apply_multiplier(multiplier, np.outer(psi, psi.conj()))
        excess = dim * float(np.real(np.vdot(output, output))) - 1.0
        return distance_to_mixed(output), excess

    results = parallel_map(measure, states)
    distances = [d for d, _ in results]
    excesses = [e for _, e in results]
    chains = [math.sqrt(max(0.0, e)) for e in excesses]

    chain_holds = all(d <= c + 1e-9 for d, c in zip(distances, chains))
    max_distance = max(distances, default=0.0)
    max_excess = max(excesses, default=0.0)
    passed = chain_holds and max_distance <= epsilon + 1e-9
    if certified:
        passed = passed and max_excess <= epsilon**2 + 1e-9
    if not passed:
        logger.warning(
            f"Epsilon check failed: max distance {max_distance:.6g} vs eps {epsilon}"
        )

    return EpsilonReport(
        n=n,
        epsilon=epsilon,
        hop_count=spec.m,
        key_set_sizes=[hop.size for hop in spec.hops],
        beta_max=beta_max,
        threshold=threshold,
        certified=certified,
        frobenius_bound=purity_bound,
        trace_bound=trace_bound,
        trials=trials,
        seed=seed,
        max_distance=max_distance,
        max_chain_value=max(chains, default=0.0),
        max_frobenius_excess=max_excess,
        chain_holds=chain_holds,
        passed=passed,
    )
