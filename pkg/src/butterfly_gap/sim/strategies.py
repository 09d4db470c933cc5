"""The flooding, backup-route and inter-node communication strategies."""
from typing import List, Union

import numpy as np

from ..exceptions import ConfigurationError, StrategyTopologyError
from ..topology import LEFT, RIGHT, Network
from .base_classes import NONE, BaseStrategy, StrategyKind


def _route(net: Network, alive: np.ndarray, i: int, j: int, side: int) -> np.ndarray:
    """Input edge, bottleneck and output edge of block (i, j) on ``side`` all alive."""
    return (
        alive[:, net.in_edge(i, j, side)]
        & alive[:, net.bottleneck(i, j)]
        & alive[:, net.out_edge(i, j, side)]
    )


def _pass_side_edges(net: Network, alive: np.ndarray, held: List[np.ndarray], row: int) -> List[np.ndarray]:
    return [np.where(alive[:, net.side_edge(c, row)], held[c], NONE) for c in range(net.nx + 1)]


class FloodCoding(BaseStrategy):
    """Every edge used once: side edges relay, the final row codes at the top relays."""

    @property
    def kind(self) -> StrategyKind:
        return StrategyKind.FLOOD

    def carry_row(self, net: Network, alive: np.ndarray, held: List[np.ndarray], row: int) -> List[np.ndarray]:
        return _pass_side_edges(net, alive, held, row)


class BackupNoCC(BaseStrategy):
    """
    Every column but the rightmost also sends its bit over the bottleneck of
    the block to its right in the upper rows. The bit arrives when either
    copy does.
    """

    @property
    def kind(self) -> StrategyKind:
        return StrategyKind.BACKUP

    def check_topology(self, net: Network) -> None:
        if net.ny < 2:
            raise StrategyTopologyError(
                f"The backup strategy needs at least 2 rows, got {net.ny}"
            )

    def carry_row(self, net: Network, alive: np.ndarray, held: List[np.ndarray], row: int) -> List[np.ndarray]:
        carried = []
        for c in range(net.nx + 1):
            arrives = alive[:, net.side_edge(c, row)]
            if c < net.nx:
                arrives = arrives | _route(net, alive, c, row, LEFT)
            carried.append(np.where(arrives, held[c], NONE))
        return carried


class InterNodeCC(BaseStrategy):
    """
    Relays talk to each other about failed edges.

    In the upper rows a token whose side edge failed is first sent over the
    backup route of the block to its right, as without communication. Blocks
    left unused then carry any stranded token of their two columns to any
    of their two lower side nodes still empty, crossing sides when needed.
    Blocks are swept left to right; a block rescues the token of its left
    column first, then fills its left output first. In the final row a top relay
    that received only one input forwards it uncoded.
    """

    forwards_lone_input = True

    # Remaining (source side, target side) moves of a free block, by priority
    _MOVES = ((LEFT, RIGHT), (RIGHT, LEFT), (RIGHT, RIGHT))

    @property
    def kind(self) -> StrategyKind:
        return StrategyKind.CC

    def carry_row(self, net: Network, alive: np.ndarray, held: List[np.ndarray], row: int) -> List[np.ndarray]:
        carried = _pass_side_edges(net, alive, held, row)
        stranded = [(held[c] != NONE) & (carried[c] == NONE) for c in range(net.nx + 1)]

        used = []
        for i in range(net.nx):
            backup = stranded[i] & _route(net, alive, i, row, LEFT)
            carried[i] = np.where(backup, held[i], carried[i])
            stranded[i] = stranded[i] & ~backup
            used.append(backup)

        for i in range(net.nx):
            free = alive[:, net.bottleneck(i, row)] & ~used[i]
            for source, target in self._MOVES:
                s, t = i + source, i + target
                move = (
                    free
                    & stranded[s]
                    & alive[:, net.in_edge(i, row, source)]
                    & (carried[t] == NONE)
                    & alive[:, net.out_edge(i, row, target)]
                )
                carried[t] = np.where(move, held[s], carried[t])
                stranded[s] = stranded[s] & ~move
                free = free & ~move
        return carried


_STRATEGIES = {
    StrategyKind.FLOOD: FloodCoding,
    StrategyKind.BACKUP: BackupNoCC,
    StrategyKind.CC: InterNodeCC,
}


def make_strategy(kind: Union[str, StrategyKind]) -> BaseStrategy:
    """Strategy instance from its kind or its name (flood, backup, cc)."""
    try:
        return _STRATEGIES[StrategyKind(kind)]()
    except ValueError:
        raise ConfigurationError(f"Unknown strategy: {kind}")
