"""
Holevo accounting and distinguishability for randomizing channels.

The Holevo quantity of the channel outputs stands in for the accessible
information of an adversary; no optimisation over measurements is attempted.
"""

import logging
import math
from typing import Optional, Union

import numpy as np

from ..exceptions import DimensionMismatchError
from ..models.keysets import ChannelSpec
from ..models.reports import HolevoBound, SecurityReport
from ..models.states import DensityMatrix, Ensemble, LogBase, PureState
from .parallel import parallel_map
from .quantum_state import distance_to_mixed, trace_norm, von_neumann_entropy
from .randomizer import Channel, apply_multiplier, as_spec, composed_channel_bias

logger = logging.getLogger(__name__)

BaseArg = Union[LogBase, str, float]


def _channel_outputs(ensemble: Ensemble, spec: Optional[ChannelSpec]) -> list:
    if spec is None:
        return list(ensemble.states)
    if spec.n != ensemble.n:
        raise DimensionMismatchError(
            f"Channel acts on {spec.n} qubits but ensemble states have {ensemble.n}"
        )
    multiplier = composed_channel_bias(spec)

    def push(state: DensityMatrix) -> DensityMatrix:
        return DensityMatrix.unchecked(state.n, apply_multiplier(multiplier, state.entries))

    return parallel_map(push, list(ensemble.states))


def _holevo(outputs: list, probs: np.ndarray, base: LogBase) -> float:
    average = sum(p * out.entries for p, out in zip(probs, outputs))
    n = outputs[0].n
    mixed_entropy = von_neumann_entropy(DensityMatrix.unchecked(n, average), base)
    member_entropy = sum(
        p * von_neumann_entropy(out, base) for p, out in zip(probs, outputs)
    )
    return float(mixed_entropy - member_entropy)


def holevo_information(
    ensemble: Ensemble, channel: Optional[Channel], base: BaseArg = LogBase.TWO
) -> float:
    """
    chi = S(sum p_i R(rho_i)) - sum p_i S(R(rho_i)).

    ``channel=None`` evaluates the raw ensemble (identity channel).
    """
    log_base = LogBase.parse(base)
    spec = as_spec(channel) if channel is not None else None
    outputs = _channel_outputs(ensemble, spec)
    return _holevo(outputs, ensemble.probs, log_base)


def holevo_quantity(ensemble: Ensemble, base: BaseArg = LogBase.TWO) -> float:
    """Holevo quantity of the ensemble itself."""
    return holevo_information(ensemble, None, base)


def holevo_bound(d: int, epsilon: float, base: BaseArg = LogBase.TWO) -> HolevoBound:
    """
    log(1 + d eps) with its regime flags.

    The strict comparison log(1 + x) < x is only evaluated for natural log,
    where it holds for every x > 0; in bits it can fail.
    """
    if d < 1 or epsilon < 0:
        raise ValueError("Need d >= 1 and epsilon >= 0")
    log_base = LogBase.parse(base)
    x = d * epsilon
    value = log_base.log(1 + x)
    small_regime = x < 1
    if not small_regime:
        logger.warning(f"d*eps = {x:.6g} >= 1: outside the regime the bound is quoted for")
    below_linear = (value < x) if log_base is LogBase.E else None
    return HolevoBound(
        d=d,
        epsilon=epsilon,
        base=log_base,
        value=value,
        small_regime=small_regime,
        below_linear=below_linear,
    )


def security_report(
    ensemble: Ensemble, channel: Channel, epsilon: float, base: BaseArg = LogBase.TWO
) -> SecurityReport:
    """chi of the ensemble through ``channel`` against log(1 + d eps)."""
    log_base = LogBase.parse(base)
    chi = holevo_information(ensemble, channel, log_base)
    d = 1 << ensemble.n
    bound = holevo_bound(d, epsilon, log_base)
    return SecurityReport(
        chi=chi,
        bound=bound.value,
        base=log_base,
        d=d,
        epsilon=epsilon,
        passed=chi <= bound.value + 1e-9,
    )


def canonical_ensemble(n: int) -> Ensemble:
    """Uniform mixture of the 2^n computational basis states."""
    states = [_basis_density(n, index) for index in range(1 << n)]
    return Ensemble.uniform(states)


def _basis_density(n: int, index: int) -> DensityMatrix:
    dim = 1 << n
    entries = np.zeros((dim, dim), dtype=np.complex128)
    entries[index, index] = 1.0
    return DensityMatrix(n=n, entries=entries)


def _as_density(state: Union[DensityMatrix, PureState]) -> DensityMatrix:
    if isinstance(state, PureState):
        psi = state.amplitudes
        return DensityMatrix(n=state.n, entries=np.outer(psi, psi.conj()))
    return state


def distinguishing_advantage(
    channel: Channel,
    rho1: Union[DensityMatrix, PureState],
    rho2: Union[DensityMatrix, PureState],
) -> float:
    """(1/2) ||R(rho1) - R(rho2)||_1, the best one-shot guessing advantage."""
    first, second = _as_density(rho1), _as_density(rho2)
    spec = as_spec(channel)
    if not first.n == second.n == spec.n:
        raise DimensionMismatchError(
            f"Qubit counts differ: channel {spec.n}, states {first.n} and {second.n}"
        )
    multiplier = composed_channel_bias(spec)
    difference = apply_multiplier(multiplier, first.entries - second.entries)
    return min(1.0, 0.5 * trace_norm(difference))


def advantage_bound(
    channel: Channel,
    rho1: Union[DensityMatrix, PureState],
    rho2: Union[DensityMatrix, PureState],
) -> float:
    """(1/2)(||R(rho1) - 1/d||_1 + ||R(rho2) - 1/d||_1), via the triangle inequality."""
    spec = as_spec(channel)
    multiplier = composed_channel_bias(spec)
    distances = [
        distance_to_mixed(apply_multiplier(multiplier, _as_density(rho).entries))
        for rho in (rho1, rho2)
    ]
    return 0.5 * math.fsum(distances)


