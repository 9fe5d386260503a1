"""
Exception hierarchy for qstlab.

Every error raised on purpose by the toolkit derives from ``QstlabError``,
which is itself a ``ValueError`` so callers that only expect bad input keep
working.
"""

from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from .models.keysets import KeySet


class QstlabError(ValueError):
    """Base class for all qstlab errors."""


class DimensionMismatchError(QstlabError):
    """Operands disagree on bit length, qubit count or matrix dimension."""


class CapExceededError(QstlabError):
    """A dense-matrix or transform size cap would be exceeded."""


class KeyFileError(QstlabError):
    """A key-set, state or manifest file could not be parsed."""


class TopologyError(QstlabError):
    """The message bus was given a malformed topology or tap set."""


class ProtocolConfigError(QstlabError):
    """Protocol configuration and keys do not fit together."""


class CertificationError(QstlabError):
    """
    No sampled key set met the bias threshold within the retry budget.

    The best set seen is kept so callers can still report on it.
    """

    def __init__(
        self,
        message: str,
        best_beta_max: float,
        threshold: float,
        attempts: int,
        best_key_set: Optional["KeySet"] = None,
    ):
        super().__init__(message)
        self.best_beta_max = best_beta_max
        self.threshold = threshold
        self.attempts = attempts
        self.best_key_set = best_key_set
