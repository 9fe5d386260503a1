"""
Deterministic in-process message bus for a chain of nodes.

Each link j (node j -> node j + 1) is a FIFO queue. Delivery order is fixed by
the order messages were sent, so a run never depends on timing. An adversary
tap on a link receives a copy of every state sent over it; copying is only
possible because the simulation is classical.
"""

import logging
from collections import deque
from typing import Deque, Dict, Iterable, List, Sequence

from pydantic import Field

from ..exceptions import TopologyError
from ..models.base import BaseModel
from ..models.states import PureState

logger = logging.getLogger(__name__)


class Envelope(BaseModel):
    """A state in flight from one node to the next."""

    sender: int = Field(ge=1)
    receiver: int = Field(ge=2)
    payload: PureState

    @property
    def hop(self) -> int:
        return self.sender


class Delivery(BaseModel):
    """One completed delivery in the bus schedule."""

    sequence: int = Field(ge=0, description="Global delivery order")
    hop: int = Field(ge=1)
    envelope: Envelope
    captured: bool


class MessageBus:
    """
    FIFO bus over the chain 1 -> 2 -> ... -> ``nodes``.

    ``taps`` names the hops the adversary copies.
    """

    no_cloning_idealized = True

    def __init__(self, nodes: int, taps: Iterable[int] = ()):
        if nodes < 2:
            raise TopologyError(f"A chain needs at least two nodes, got {nodes}")
        self.nodes = nodes
        self.taps = frozenset(int(t) for t in taps)
        invalid = sorted(t for t in self.taps if not 1 <= t < nodes)
        if invalid:
            raise TopologyError(f"Tapped hops {invalid} not in 1..{nodes - 1}")
        self._queues: Dict[int, Deque[Envelope]] = {
            hop: deque() for hop in range(1, nodes)
        }
        self._sequence = 0
        self.deliveries: List[Delivery] = []
        self.captures: List[Envelope] = []

    @property
    def hop_count(self) -> int:
        return self.nodes - 1

    def send(self, envelope: Envelope) -> None:
        """Queue ``envelope`` on its link, copying it to the adversary if tapped."""
        if envelope.receiver != envelope.sender + 1 or envelope.receiver > self.nodes:
            raise TopologyError(
                f"No link {envelope.sender} -> {envelope.receiver} in a chain of {self.nodes}"
            )
        self._queues[envelope.hop].append(envelope)
        if envelope.hop in self.taps:
            self.captures.append(envelope)
            logger.debug(f"Adversary copied the state on hop {envelope.hop}")

    def receive(self, node: int) -> Envelope:
        """Pop the oldest envelope addressed to ``node``."""
        if not 2 <= node <= self.nodes:
            raise TopologyError(f"Node {node} has no incoming link")
        queue = self._queues[node - 1]
        if not queue:
            raise TopologyError(f"Nothing pending for node {node}")
        envelope = queue.popleft()
        self.deliveries.append(
            Delivery(
                sequence=self._sequence,
                hop=envelope.hop,
                envelope=envelope,
                captured=envelope.hop in self.taps,
            )
        )
        self._sequence += 1
        return envelope

    def pending(self) -> int:
        return sum(len(queue) for queue in self._queues.values())

    def drain(self) -> List[Delivery]:
        """Deliver everything still queued, first hop first."""
        for hop, queue in self._queues.items():
            while queue:
                self.receive(hop + 1)
        return self.deliveries


def bus_deliver(
    messages: Sequence[Envelope], nodes: int, taps: Iterable[int] = ()
) -> List[Delivery]:
    """
    Delivery schedule for ``messages`` on a fresh bus.

    Messages are queued in the given order and drained link by link, first hop
    first; within a link delivery is FIFO.
    """
    bus = MessageBus(nodes, taps)
    for envelope in messages:
        bus.send(envelope)
    return bus.drain()
