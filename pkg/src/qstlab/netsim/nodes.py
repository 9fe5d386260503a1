"""
Node state machines for the chain.

Node 1 encodes the input and forwards it, nodes 2..m-1 re-encode what they
receive and forward it, and node m applies its key and keeps the result.
"""

import logging
from enum import Enum
from typing import Optional

from ..core.pauli_algebra import apply_key
from ..exceptions import ProtocolConfigError
from ..models.pauli import PauliKey
from ..models.states import PureState
from .bus import Envelope, MessageBus

logger = logging.getLogger(__name__)


class NodeRole(str, Enum):
    SENDER = "sender"
    RELAY = "relay"
    RECEIVER = "receiver"


class NodeStatus(str, Enum):
    IDLE = "idle"
    HOLDING = "holding"
    FORWARDED = "forwarded"
    DONE = "done"


class Node:
    """One party of the chain, holding its own key."""

    def __init__(self, index: int, m: int, key: PauliKey):
        if not 1 <= index <= m:
            raise ProtocolConfigError(f"Node index {index} outside 1..{m}")
        self.index = index
        self.m = m
        self.key = key
        self.status = NodeStatus.IDLE
        self._state: Optional[PureState] = None

    @property
    def role(self) -> NodeRole:
        if self.index == 1:
            return NodeRole.SENDER
        if self.index == self.m:
            return NodeRole.RECEIVER
        return NodeRole.RELAY

    @property
    def state(self) -> Optional[PureState]:
        return self._state

    def _encode(self, state: PureState) -> None:
        if self.status is not NodeStatus.IDLE:
            raise ProtocolConfigError(f"Node {self.index} already handled a state")
        if state.n != self.key.n:
            raise ProtocolConfigError(
                f"Node {self.index} holds an {self.key.n}-qubit key, got {state.n} qubits"
            )
        self._state = apply_key(state, self.key)
        self.status = NodeStatus.DONE if self.role is NodeRole.RECEIVER else NodeStatus.HOLDING

    def start(self, state: PureState) -> None:
        """Sender only: encode the input state."""
        if self.role is not NodeRole.SENDER:
            raise ProtocolConfigError(f"Node {self.index} is not the sender")
        self._encode(state)

    def on_receive(self, envelope: Envelope) -> None:
        if self.role is NodeRole.SENDER:
            raise ProtocolConfigError("The sender has no incoming link")
        self._encode(envelope.payload)

    def forward(self, bus: MessageBus) -> Envelope:
        if self.status is not NodeStatus.HOLDING or self._state is None:
            raise ProtocolConfigError(f"Node {self.index} has nothing to forward")
        envelope = Envelope(sender=self.index, receiver=self.index + 1, payload=self._state)
        bus.send(envelope)
        self.status = NodeStatus.FORWARDED
        logger.debug(f"Node {self.index} forwarded to node {self.index + 1}")
        return envelope
