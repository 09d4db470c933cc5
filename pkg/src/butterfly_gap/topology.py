"""Butterfly-block grids and their cuts.

A grid has ``nx`` blocks per row and ``ny`` rows. Side column ``c``
(0..nx) is a chain of nodes from sender ``A_c`` (row 0) through the
intermediate nodes (rows 1..ny-1) down to receiver ``B_c`` (row ny).
Block (i, j) joins the side nodes of columns i and i+1 at row j into its
top relay, carries them over the bottleneck to its bottom relay and fans
out to the side nodes of the same columns at row j+1.
"""
import dataclasses
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

import networkx

from .channels import ChannelModel, ree_edge
from .exceptions import ConfigurationError, InvalidCutError

LEFT, RIGHT = 0, 1


class NodeRole(IntEnum):
    SENDER = 0
    INTERMEDIATE = 1
    RELAY_TOP = 2
    RELAY_BOTTOM = 3
    RECEIVER = 4


_ROLE_PREFIX = {
    NodeRole.SENDER: "A",
    NodeRole.INTERMEDIATE: "I",
    NodeRole.RELAY_TOP: "RT",
    NodeRole.RELAY_BOTTOM: "RB",
    NodeRole.RECEIVER: "B",
}


@dataclass(frozen=True, order=True)
class NodeId:
    """A node of a grid, ordered by (role, column, row)."""

    role: NodeRole
    column: int
    row: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "role", NodeRole(self.role))
        if self.column < 0 or self.row < 0:
            raise ConfigurationError(f"Negative node coordinates: {self!r}")
        if self.role is NodeRole.SENDER and self.row != 0:
            raise ConfigurationError("Sender nodes live on row 0.")

    def __str__(self) -> str:
        return self.label

    @property
    def label(self) -> str:
        prefix = _ROLE_PREFIX[self.role]
        if self.role in (NodeRole.SENDER, NodeRole.RECEIVER):
            return f"{prefix}{self.column}"
        return f"{prefix}{self.column}.{self.row}"


@dataclass(frozen=True)
class Edge:
    """An undirected channel between two nodes, endpoints stored sorted."""

    u: NodeId
    v: NodeId
    channel: ChannelModel

    def __post_init__(self) -> None:
        if self.u == self.v:
            raise ConfigurationError(f"Self loop on {self.u}")
        if self.v < self.u:
            u, v = self.v, self.u
            object.__setattr__(self, "u", u)
            object.__setattr__(self, "v", v)

    @property
    def key(self) -> Tuple[NodeId, NodeId]:
        return (self.u, self.v)


@dataclass(frozen=True)
class Network:
    """
    An immutable butterfly grid.

    Edges are kept in canonical order (sorted by their endpoint ids); the
    position of an edge in ``edges`` is its index in edge samples.
    """

    nx: int
    ny: int
    nodes: Tuple[NodeId, ...]
    edges: Tuple[Edge, ...]
    senders: Tuple[NodeId, ...]
    receivers: Tuple[NodeId, ...]
    _index: Dict[Tuple[NodeId, NodeId], int] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if len(self.senders) != self.nx + 1 or len(self.receivers) != self.nx + 1:
            raise ConfigurationError("A grid has nx + 1 senders and receivers.")
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.key)))
        node_set = set(self.nodes)
        index = {}
        for cnt, edge in enumerate(self.edges):
            if edge.u not in node_set or edge.v not in node_set:
                raise ConfigurationError(f"Edge {edge.u}-{edge.v} has an unknown endpoint.")
            if edge.key in index:
                raise ConfigurationError(f"Duplicate edge {edge.u}-{edge.v}.")
            index[edge.key] = cnt
        object.__setattr__(self, "_index", index)

    # DUNDER METHODS
    def __repr__(self) -> str:
        return f"Network(nx={self.nx}, ny={self.ny}, edges={self.n_edges})"

    def __str__(self) -> str:
        return f"{self.nx}x{self.ny} butterfly grid"

    # PROPERTIES
    @property
    def r(self) -> int:
        """Number of receivers."""
        return len(self.receivers)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def channel(self) -> Optional[ChannelModel]:
        """The shared edge channel, or None if the labels differ."""
        channels = {edge.channel for edge in self.edges}
        return channels.pop() if len(channels) == 1 else None

    # NODES
    def side_node(self, column: int, row: int) -> NodeId:
        """The side-column node of ``column`` at level ``row`` (0..ny)."""
        if row == 0:
            return NodeId(NodeRole.SENDER, column, 0)
        if row == self.ny:
            return NodeId(NodeRole.RECEIVER, column, self.ny)
        return NodeId(NodeRole.INTERMEDIATE, column, row)

    @staticmethod
    def top_relay(i: int, j: int) -> NodeId:
        return NodeId(NodeRole.RELAY_TOP, i, j)

    @staticmethod
    def bottom_relay(i: int, j: int) -> NodeId:
        return NodeId(NodeRole.RELAY_BOTTOM, i, j)

    # EDGES
    def edge_index(self, u: NodeId, v: NodeId) -> int:
        """Canonical index of the edge between ``u`` and ``v``."""
        key = (u, v) if u < v else (v, u)
        try:
            return self._index[key]
        except KeyError:
            raise ConfigurationError(f"No edge between {u} and {v}.")

    def side_edge(self, column: int, row: int) -> int:
        """Side edge of ``column`` from level ``row`` to ``row + 1``."""
        return self.edge_index(self.side_node(column, row), self.side_node(column, row + 1))

    def in_edge(self, i: int, j: int, side: int) -> int:
        """Edge from the left (side 0) or right (side 1) input into block (i, j)."""
        return self.edge_index(self.side_node(i + side, j), self.top_relay(i, j))

    def bottleneck(self, i: int, j: int) -> int:
        return self.edge_index(self.top_relay(i, j), self.bottom_relay(i, j))

    def out_edge(self, i: int, j: int, side: int) -> int:
        """Edge from block (i, j) to the left (side 0) or right (side 1) output."""
        return self.edge_index(self.bottom_relay(i, j), self.side_node(i + side, j + 1))

    def with_channel(self, u: NodeId, v: NodeId, ch: ChannelModel) -> "Network":
        """Copy of the network with the edge ``u``-``v`` relabelled to ``ch``."""
        idx = self.edge_index(u, v)
        edges = list(self.edges)
        edges[idx] = Edge(edges[idx].u, edges[idx].v, ch)
        return dataclasses.replace(self, edges=tuple(edges))

    # EXPORT
    def to_graph(self) -> networkx.Graph:
        """Undirected graph with the edge REE stored as ``capacity``."""
        graph = networkx.Graph()
        graph.add_nodes_from(self.nodes)
        for edge in self.edges:
            graph.add_edge(edge.u, edge.v, capacity=ree_edge(edge.channel), channel=edge.channel)
        return graph

    def to_adjacency_text(self) -> str:
        """One edge per line: ``nodeA nodeB channel-kind param``."""
        lines = [
            f"{edge.u.label} {edge.v.label} {edge.channel.kind.value} {edge.channel.param:.12g}"
            for edge in self.edges
        ]
        return "\n".join(lines) + "\n"


def build_grid(nx: int, ny: int, ch: ChannelModel) -> Network:
    """
    Build an ``nx`` by ``ny`` grid of butterfly blocks with every edge set to ``ch``.

    Horizontally adjacent blocks share the side column between them,
    vertically adjacent blocks meet in the intermediate side nodes.

    Parameters
    ----------
    nx : int
        Blocks per row, at least 1.
    ny : int
        Rows of blocks, at least 1.
    ch : ChannelModel
        The channel on every edge.

    Raises
    ------
    ConfigurationError
        If nx or ny is smaller than 1.

    Returns
    -------
    Network
        The grid, with (nx+1)*ny side edges and 5*nx*ny block edges.
    """
    if not isinstance(nx, int) or not isinstance(ny, int) or nx < 1 or ny < 1:
        raise ConfigurationError(f"Grid size must be at least 1x1, got {nx}x{ny}")

    senders = tuple(NodeId(NodeRole.SENDER, c, 0) for c in range(nx + 1))
    receivers = tuple(NodeId(NodeRole.RECEIVER, c, ny) for c in range(nx + 1))
    skeleton = Network(nx, ny, senders + receivers, (), senders, receivers)

    nodes = set(senders + receivers)
    edges = []
    for c in range(nx + 1):
        for j in range(ny):
            upper, lower = skeleton.side_node(c, j), skeleton.side_node(c, j + 1)
            nodes.update((upper, lower))
            edges.append(Edge(upper, lower, ch))

    for i in range(nx):
        for j in range(ny):
            top, bottom = Network.top_relay(i, j), Network.bottom_relay(i, j)
            nodes.update((top, bottom))
            edges.append(Edge(top, bottom, ch))
            for side in (LEFT, RIGHT):
                edges.append(Edge(skeleton.side_node(i + side, j), top, ch))
                edges.append(Edge(bottom, skeleton.side_node(i + side, j + 1), ch))

    return Network(nx, ny, tuple(nodes), tuple(edges), senders, receivers)


@dataclass(frozen=True)
class Cut:
    """A bipartition given by its sender side; every other node is on side B."""

    side_a: FrozenSet[NodeId]

    @classmethod
    def from_nodes(cls, nodes: Iterable[NodeId]) -> "Cut":
        return cls(frozenset(nodes))

    def validate(self, net: Network) -> None:
        """
        Check the cut against a network.

        Raises
        ------
        InvalidCutError
            If a sender is on side B, a receiver on side A, or a node is unknown.
        """
        unknown = self.side_a - set(net.nodes)
        if unknown:
            raise InvalidCutError(f"Unknown nodes in cut: {sorted(unknown)}")
        if not set(net.senders) <= self.side_a:
            raise InvalidCutError("Every sender must be on side A of the cut.")
        if self.side_a & set(net.receivers):
            raise InvalidCutError("No receiver may be on side A of the cut.")

    def crosses(self, edge: Edge) -> bool:
        return (edge.u in self.side_a) != (edge.v in self.side_a)


def cut_value(net: Network, cut: Cut) -> float:
    """
    Summed REE of the edges the cut disconnects.

    Parameters
    ----------
    net : Network
        The network.
    cut : Cut
        A cut with all senders on side A and all receivers on side B.

    Raises
    ------
    InvalidCutError
        If the cut does not respect the sender/receiver partition.

    Returns
    -------
    float
        The multi-edge flow of REE through the cut.
    """
    cut.validate(net)
    return math.fsum(ree_edge(edge.channel) for edge in net.edges if cut.crosses(edge))
