"""Upper bounds on quantum multicast rates from REE cuts."""
import itertools
import logging
import math
from dataclasses import dataclass

import networkx
from networkx.algorithms.flow import edmonds_karp

from ..channels import ChannelModel, ree_edge
from ..exceptions import ConfigurationError
from ..topology import Cut, Network, NodeId, NodeRole, cut_value

logger = logging.getLogger(__name__)

_SUPER_SOURCE = "super-source"
_SUPER_SINK = "super-sink"


@dataclass(frozen=True)
class QuantumBoundResult:
    """Minimum cut of the REE flow, in total and per receiver."""

    total_flow: float
    per_receiver: float
    witness_cut: Cut


def multipath_bound(net: Network) -> QuantumBoundResult:
    """
    Quantum bound of a network by max-flow/min-cut.

    The senders and the receivers are merged into a super-source and a
    super-sink with unbounded links; every network edge is a pair of
    antiparallel arcs with capacity equal to its REE.

    Parameters
    ----------
    net : Network
        The network.

    Returns
    -------
    QuantumBoundResult
        The minimum cut value, the value per receiver and a cut attaining it.
        Disconnected sender and receiver sets give zero.
    """
    flow_graph = networkx.DiGraph()
    flow_graph.add_nodes_from(net.nodes)
    for edge in net.edges:
        capacity = ree_edge(edge.channel)
        flow_graph.add_edge(edge.u, edge.v, capacity=capacity)
        flow_graph.add_edge(edge.v, edge.u, capacity=capacity)

    # Links without a capacity attribute are unbounded
    for sender in net.senders:
        flow_graph.add_edge(_SUPER_SOURCE, sender)
    for receiver in net.receivers:
        flow_graph.add_edge(receiver, _SUPER_SINK)

    total, flows = networkx.maximum_flow(
        flow_graph, _SUPER_SOURCE, _SUPER_SINK, flow_func=edmonds_karp
    )
    witness = _residual_cut(flow_graph, flows)
    logger.debug(
        "Max flow of %r: %.12g, witness cut %.12g", net, total, cut_value(net, witness)
    )
    return QuantumBoundResult(total, total / net.r, witness)


def _residual_cut(flow_graph: networkx.DiGraph, flows: dict, tol: float = 1e-12) -> Cut:
    """Nodes reachable from the super-source in the residual graph.

    Residual capacities below ``tol`` count as saturated, real-valued
    capacities leave rounding crumbs on saturated arcs.
    """
    reachable = {_SUPER_SOURCE}
    stack = [_SUPER_SOURCE]
    while stack:
        u = stack.pop()
        for v, attr in flow_graph[u].items():
            if v in reachable:
                continue
            backward = flows[v].get(u, 0.0) if flow_graph.has_edge(v, u) else 0.0
            residual = attr.get("capacity", math.inf) - flows[u][v] + backward
            if residual > tol:
                reachable.add(v)
                stack.append(v)
    return Cut.from_nodes(node for node in reachable if node != _SUPER_SOURCE)


def closed_form_bound(nx: int, ny: int, ch: ChannelModel) -> float:
    """
    Quantum bound per receiver of a homogeneous grid, ``(2r - 1)/r * REE``.

    The minimum cut crosses one row: its r side edges and nx bottlenecks.
    The value does not depend on ``ny``.
    """
    if nx < 1 or ny < 1:
        raise ConfigurationError(f"Grid size must be at least 1x1, got {nx}x{ny}")
    r = nx + 1
    return (2 * r - 1) / r * ree_edge(ch)


def singlepath_bound(net: Network, a: NodeId, b: NodeId) -> float:
    """
    Single-path quantum bound between one sender and one receiver.

    The minimum over cuts of the largest edge REE in the cut-set equals
    the bottleneck value of the widest path, which a maximum spanning tree
    contains.

    Parameters
    ----------
    net : Network
        The network, edge labels may differ.
    a : NodeId
        A sender.
    b : NodeId
        A receiver.

    Raises
    ------
    ConfigurationError
        If ``a`` is not a sender or ``b`` not a receiver of ``net``.

    Returns
    -------
    float
        The bound, 0 when no path joins ``a`` and ``b``.
    """
    if a not in net.senders or b not in net.receivers:
        raise ConfigurationError(f"{a} must be a sender and {b} a receiver.")

    tree = networkx.maximum_spanning_tree(net.to_graph(), weight="capacity")
    try:
        path = networkx.shortest_path(tree, a, b)
    except networkx.NetworkXNoPath:
        return 0.0
    return min(tree[u][v]["capacity"] for u, v in zip(path, path[1:]))


def brute_force_min_cut(net: Network, max_interior: int = 16) -> float:
    """Minimum cut value by enumerating every placement of the interior nodes."""
    interior = [
        node
        for node in net.nodes
        if node.role not in (NodeRole.SENDER, NodeRole.RECEIVER)
    ]
    if len(interior) > max_interior:
        raise ConfigurationError(
            f"{len(interior)} interior nodes, brute force is capped at {max_interior}"
        )
    best = math.inf
    for mask in itertools.product((False, True), repeat=len(interior)):
        side_a = set(net.senders)
        side_a.update(node for node, on_a in zip(interior, mask) if on_a)
        best = min(best, cut_value(net, Cut.from_nodes(side_a)))
    return best
