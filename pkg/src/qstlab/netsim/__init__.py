"""In-process simulation of the m-party chain."""

from .bus import Delivery, Envelope, MessageBus, bus_deliver
from .protocol import (
    eavesdropper_state,
    idealized_composed_state,
    keygen_correlated,
    run_protocol,
    security_report,
)

__all__ = [
    "Delivery",
    "Envelope",
    "MessageBus",
    "bus_deliver",
    "eavesdropper_state",
    "idealized_composed_state",
    "keygen_correlated",
    "run_protocol",
    "security_report",
]
