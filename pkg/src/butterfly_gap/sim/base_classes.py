"""Routing and coding strategies for erasure grids.

A strategy works on a batch of edge states at once: ``alive`` is a boolean
matrix with one row per trial and one column per edge in the network's
canonical edge order. Every strategy follows the same three steps:

1. carry a message through the upper rows, one per side node,
2. network code in the final row,
3. let every receiver decode what it can with certainty.

Between rows a side node holds the id of the message it carries (a token)
or ``NONE``. Tokens start on their own column and only move between
columns under inter-node communication.
"""
from abc import ABC, abstractmethod
from enum import Enum
from typing import List, Tuple

import numpy as np

from ..topology import LEFT, RIGHT, Network

NONE = -1

# Parity heard by a receiver: (heard, left token, right token), per trial
Parity = Tuple[np.ndarray, np.ndarray, np.ndarray]


class StrategyKind(str, Enum):
    FLOOD = "flood"
    BACKUP = "backup"
    CC = "cc"


class BaseStrategy(ABC):
    """Base class for a grid strategy."""

    # Forward a lone relay input uncoded when the other input is missing
    forwards_lone_input = False

    # DUNDER METHODS
    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    def __eq__(self, other) -> bool:
        return type(self) is type(other)

    def __hash__(self) -> int:
        return hash(type(self))

    # PROPERTIES
    @property
    @abstractmethod
    def kind(self) -> StrategyKind:
        """The kind of the strategy."""
        pass

    @property
    def name(self) -> str:
        return self.kind.value

    # FUNCTIONS
    def check_topology(self, net: Network) -> None:
        """Raise StrategyTopologyError if the strategy cannot run on ``net``."""
        pass

    @abstractmethod
    def carry_row(self, net: Network, alive: np.ndarray, held: List[np.ndarray], row: int) -> List[np.ndarray]:
        """
        Move the tokens from the side nodes of level ``row`` to level ``row + 1``.

        Parameters
        ----------
        net : Network
            The grid.
        alive : np.ndarray
            Edge states, shape (trials, edges).
        held : list of np.ndarray
            Per column, the token of its side node at ``row``, ``NONE`` if empty.
        row : int
            An upper row, 0..ny-2.

        Returns
        -------
        list of np.ndarray
            Per column, the token of the side node at ``row + 1``.
        """
        pass

    def deliverable_bits(self, net: Network, alive: np.ndarray) -> np.ndarray:
        """
        Number of distinct messages every receiver decodes with certainty.

        Parameters
        ----------
        net : Network
            The grid.
        alive : np.ndarray
            Edge states, shape (trials, edges).

        Returns
        -------
        np.ndarray
            Integer counts, shape (trials, receivers).
        """
        self.check_topology(net)
        n_trials = alive.shape[0]
        held = [np.full(n_trials, c, dtype=np.int64) for c in range(net.nx + 1)]
        for row in range(net.ny - 1):
            held = self.carry_row(net, alive, held, row)

        knowledge, parities = self._final_row(net, alive, held)
        counts = np.zeros((n_trials, net.r), dtype=np.int64)
        for c in range(net.nx + 1):
            counts[:, c] = _close(knowledge[c], parities[c]).sum(axis=1)
        return counts

    def _final_row(self, net: Network, alive: np.ndarray, held: List[np.ndarray]):
        """Direct bits, raw forwards and parities reaching each receiver."""
        row = net.ny - 1
        n_trials = alive.shape[0]

        knowledge: List[np.ndarray] = []
        parities: List[List[Parity]] = []
        for c in range(net.nx + 1):
            known = np.zeros((n_trials, net.r), dtype=bool)
            _learn(known, held[c], alive[:, net.side_edge(c, row)])
            knowledge.append(known)
            parities.append([])

        for i in range(net.nx):
            present_l = (held[i] != NONE) & alive[:, net.in_edge(i, row, LEFT)]
            present_r = (held[i + 1] != NONE) & alive[:, net.in_edge(i, row, RIGHT)]
            middle = alive[:, net.bottleneck(i, row)]
            coded = present_l & present_r & middle
            for side, receiver in ((LEFT, i), (RIGHT, i + 1)):
                out = alive[:, net.out_edge(i, row, side)]
                parities[receiver].append((coded & out, held[i], held[i + 1]))
                if self.forwards_lone_input:
                    lone = middle & out
                    _learn(knowledge[receiver], held[i], lone & present_l & ~present_r)
                    _learn(knowledge[receiver], held[i + 1], lone & present_r & ~present_l)
        return knowledge, parities


def _learn(known: np.ndarray, tokens: np.ndarray, mask: np.ndarray) -> None:
    """Mark ``tokens`` known in the trials selected by ``mask``, in place."""
    trials = np.flatnonzero(mask & (tokens != NONE))
    known[trials, tokens[trials]] = True


def _close(known: np.ndarray, parities: List[Parity]) -> np.ndarray:
    """Decode the parities ``a_left ^ a_right`` against the known messages.

    A receiver hears at most two parities; two passes close the chain.
    """
    known = known.copy()
    rows = np.arange(known.shape[0])
    for _ in range(2):
        for heard, left, right in parities:
            either = heard & (
                known[rows, np.maximum(left, 0)] | known[rows, np.maximum(right, 0)]
            )
            _learn(known, left, either)
            _learn(known, right, either)
    return known
