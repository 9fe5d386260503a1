"""
Report Models

Machine-readable results of certification, verification and security
analysis. Every report is a frozen pydantic model so it serialises to the same
bytes on every run with the same inputs.
"""

from typing import Dict, List, Optional

from pydantic import Field

from .base import BaseModel
from .keysets import BiasProfile, KeySet
from .states import LogBase


class CertificationResult(BaseModel):
    """A sampled key set that met its bias threshold."""

    key_set: KeySet
    profile: BiasProfile
    attempts: int = Field(ge=1, description="Samples drawn before acceptance")
    threshold: float = Field(gt=0, description="Bias threshold the set met")


class EpsilonReport(BaseModel):
    """
    Analytic certificate plus Monte-Carlo check of an epsilon-randomizer.

    The certificate holds when ``beta_max <= threshold``; it then bounds the
    output purity by ``frobenius_bound`` and the trace distance by
    ``trace_bound``. The Monte-Carlo part records the worst case over random
    pure inputs.
    """

    n: int
    epsilon: float
    hop_count: int
    key_set_sizes: List[int]
    beta_max: float = Field(description="Largest nontrivial bias of the (composed) channel")
    threshold: float = Field(description="epsilon * 2^(-n/2)")
    certified: bool
    frobenius_bound: float = Field(description="Worst-case ||R(rho)||_2^2 over pure inputs")
    trace_bound: float = Field(description="Analytic bound on ||R(rho) - 1/d||_1")
    trials: int
    seed: int
    max_distance: float
    max_chain_value: float = Field(description="max sqrt(2^n ||R(rho)||_2^2 - 1)")
    max_frobenius_excess: float = Field(description="max 2^n ||R(rho)||_2^2 - 1")
    chain_holds: bool
    passed: bool


class HolevoBound(BaseModel):
    """log(1 + d eps) together with the regime flags it is quoted under."""

    d: int = Field(ge=1)
    epsilon: float = Field(ge=0)
    base: LogBase
    value: float
    small_regime: bool = Field(description="d * eps < 1")
    below_linear: Optional[bool] = Field(
        default=None,
        description="log(1 + d eps) < d eps; only evaluated for natural log",
    )


class SecurityReport(BaseModel):
    """Holevo information of an ensemble through a channel against its bound."""

    chi: float
    bound: float
    base: LogBase
    d: int
    epsilon: float
    passed: bool = Field(serialization_alias="pass")


class HopSecurity(BaseModel):
    """Per-hop figures for one link of the chain."""

    hop: int = Field(ge=1)
    key_set_size: int
    beta_max: float
    threshold: float
    certified: bool
    single_hop_distance: float = Field(description="max ||R_{E_j}(rho) - 1/d||_1 measured")
    adversary_distance: float = Field(description="max distance of the hop-j adversary view")


class ProtocolSecurityReport(BaseModel):
    """End-to-end security figures of one protocol configuration."""

    m: int
    n: int
    epsilon: float
    seed: int
    trials: int
    hops: List[HopSecurity]
    composed_beta_max: float
    composed_distance: float = Field(description="Adversary view after the last hop")
    idealized_composed_distance: float = Field(
        description="m-fold composition with the final map modelled as independent"
    )
    chi: float
    holevo: HolevoBound
    passed: bool
    notes: List[str] = Field(default_factory=list)

    def holevo_report(self) -> SecurityReport:
        """The Holevo half of the report in the standalone report layout."""
        return SecurityReport(
            chi=self.chi,
            bound=self.holevo.value,
            base=self.holevo.base,
            d=self.holevo.d,
            epsilon=self.epsilon,
            passed=self.chi <= self.holevo.value + 1e-9,
        )


class RunManifest(BaseModel):
    """Everything needed to reproduce a command's outputs byte for byte."""

    command: str
    argv: List[str]
    flags: Dict[str, Optional[str]]
    seed: int
    version: str
    input_hashes: Dict[str, str] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    output_hashes: Dict[str, str] = Field(default_factory=dict)
    exit_code: int = 0
