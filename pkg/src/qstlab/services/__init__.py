"""Business layer between the command line and the core modules."""

from .experiment_service import CommandOutcome, ExperimentService

__all__ = ["CommandOutcome", "ExperimentService"]
