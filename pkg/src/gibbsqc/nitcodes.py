"""Per-node qubit ("nit") allocation, state naming and nit blankets.

A node with N >= 2 states owns ceil(log2 N) private nits; a one-state node
owns none.  Nits are numbered globally in focus-node order, and inside a
node the lowest global index carries the least-significant bit of the
state's binary name.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass

from gibbsqc.bayesnet import BayesNet, node_blanket

log = logging.getLogger(__name__)


def nit_count(n_states: int) -> int:
    return (n_states - 1).bit_length()


@dataclass(frozen=True)
class NitLayout:
    nodes: tuple[str, ...]
    nits: Mapping[str, tuple[int, ...]]  # node -> its global nit indices, ascending
    owner: tuple[str, ...]  # global nit index -> owning node

    @property
    def nb(self) -> int:
        return len(self.owner)

    def count(self, node: str) -> int:
        return len(self.nits[node])

    def encode(self, x: Mapping[str, int]) -> dict[int, int]:
        """Bit value of every nit for the instantiation ``x``."""
        bits = {}
        for node, nits in self.nits.items():
            for k, nit in enumerate(nits):
                bits[nit] = (x[node] >> k) & 1
        return bits

    def decode(self, bits: Mapping[int, int]) -> dict[str, int]:
        return {
            node: sum(bits[nit] << k for k, nit in enumerate(nits))
            for node, nits in self.nits.items()
        }


@dataclass(frozen=True)
class StateName:
    english: str
    decimal: int
    binary: str

    def __str__(self):
        return f"{self.english}({self.binary}){self.decimal}"


def build_layout(net: BayesNet) -> NitLayout:
    nits = {}
    owner: list[str] = []
    for node in net.nodes:
        k = nit_count(node.n_states)
        if k == 0:
            log.warning("node %r has a single state and gets no nits", node.name)
        nits[node.name] = tuple(range(len(owner), len(owner) + k))
        owner.extend([node.name] * k)
    return NitLayout(tuple(net.names), nits, tuple(owner))


def state_names(net: BayesNet, layout: NitLayout, node: str) -> list[StateName]:
    width = layout.count(node)
    return [
        StateName(s, i, format(i, f"0{width}b") if width else "")
        for i, s in enumerate(net.node(node).states)
    ]


def nit_blanket(net: BayesNet, layout: NitLayout, nit: int) -> set[int]:
    """Sibling nits of the same owner plus every nit of the owner's blanket nodes."""
    if not 0 <= nit < layout.nb:
        raise IndexError(f"nit {nit} out of range 0..{layout.nb - 1}")
    owner = layout.owner[nit]
    blanket = set(layout.nits[owner])
    for m in node_blanket(net, owner):
        blanket.update(layout.nits[m])
    blanket.discard(nit)
    return blanket
