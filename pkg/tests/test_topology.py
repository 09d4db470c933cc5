import unittest

from butterfly_gap.channels import ChannelModel
from butterfly_gap.exceptions import ConfigurationError, InvalidCutError
from butterfly_gap.topology import (
    LEFT,
    RIGHT,
    Cut,
    Network,
    NodeId,
    NodeRole,
    build_grid,
    cut_value,
)


class TestBuildGrid(unittest.TestCase):

    def setUp(self):
        self.ch = ChannelModel.identity()

    def test_single_block(self):
        net = build_grid(1, 1, self.ch)
        self.assertEqual(net.n_edges, 7)
        self.assertEqual(len(net.nodes), 6)
        self.assertEqual([n.label for n in net.senders], ["A0", "A1"])
        self.assertEqual([n.label for n in net.receivers], ["B0", "B1"])
        self.assertEqual(net.r, 2)

    # Test two blocks in a row share the middle side column.
    def test_parallel_row(self):
        self.assertEqual(build_grid(2, 1, self.ch).n_edges, 13)

    def test_ladder(self):
        net = build_grid(1, 2, self.ch)
        self.assertEqual(net.n_edges, 14)
        intermediates = [n for n in net.nodes if n.role is NodeRole.INTERMEDIATE]
        self.assertEqual(len(intermediates), 2)

    def test_edge_and_node_counts(self):
        for nx in range(1, 5):
            for ny in range(1, 5):
                net = build_grid(nx, ny, self.ch)
                self.assertEqual(net.n_edges, (nx + 1) * ny + 5 * nx * ny)
                self.assertEqual(len(net.nodes), (nx + 1) * (ny + 1) + 2 * nx * ny)
                self.assertEqual(net.r, nx + 1)

    def test_bad_size(self):
        for nx, ny in ((0, 1), (1, 0), (-1, 2)):
            with self.assertRaises(ConfigurationError):
                build_grid(nx, ny, self.ch)

    def test_canonical_edge_order(self):
        net = build_grid(2, 2, self.ch)
        keys = [edge.key for edge in net.edges]
        self.assertEqual(keys, sorted(keys))
        for idx, edge in enumerate(net.edges):
            self.assertEqual(net.edge_index(edge.u, edge.v), idx)
            self.assertEqual(net.edge_index(edge.v, edge.u), idx)

    def test_homogeneous_channel(self):
        ch = ChannelModel.erasure(0.3)
        self.assertEqual(build_grid(2, 3, ch).channel, ch)


class TestAccessors(unittest.TestCase):

    def setUp(self):
        self.net = build_grid(2, 2, ChannelModel.identity())

    def test_side_nodes(self):
        self.assertIs(self.net.side_node(1, 0).role, NodeRole.SENDER)
        self.assertIs(self.net.side_node(1, 1).role, NodeRole.INTERMEDIATE)
        self.assertIs(self.net.side_node(1, 2).role, NodeRole.RECEIVER)

    def test_block_edges(self):
        edge = self.net.edges[self.net.in_edge(1, 0, LEFT)]
        self.assertEqual({edge.u.label, edge.v.label}, {"A1", "RT1.0"})
        edge = self.net.edges[self.net.out_edge(1, 1, RIGHT)]
        self.assertEqual({edge.u.label, edge.v.label}, {"RB1.1", "B2"})
        edge = self.net.edges[self.net.bottleneck(0, 1)]
        self.assertEqual({edge.u.label, edge.v.label}, {"RT0.1", "RB0.1"})
        edge = self.net.edges[self.net.side_edge(2, 1)]
        self.assertEqual({edge.u.label, edge.v.label}, {"I2.1", "B2"})

    def test_missing_edge(self):
        with self.assertRaises(ConfigurationError):
            self.net.edge_index(self.net.senders[0], self.net.receivers[2])

    def test_with_channel(self):
        a0, b0 = self.net.side_node(0, 0), self.net.side_node(0, 1)
        relabelled = self.net.with_channel(a0, b0, ChannelModel.erasure(0.5))
        self.assertIsNone(relabelled.channel)
        self.assertEqual(relabelled.edges[relabelled.edge_index(a0, b0)].channel, ChannelModel.erasure(0.5))
        self.assertEqual(self.net.channel, ChannelModel.identity())

    def test_exports(self):
        text = self.net.to_adjacency_text()
        self.assertEqual(len(text.splitlines()), self.net.n_edges)
        self.assertTrue(text.splitlines()[0].endswith("identity 0"))
        graph = self.net.to_graph()
        self.assertEqual(graph.number_of_edges(), self.net.n_edges)
        u, v = self.net.edges[0].key
        self.assertEqual(graph[u][v]["capacity"], 1.0)

    def test_node_validation(self):
        with self.assertRaises(ConfigurationError):
            NodeId(NodeRole.SENDER, 0, 1)
        self.assertLess(NodeId(NodeRole.SENDER, 3, 0), NodeId(NodeRole.RECEIVER, 0, 1))


class TestCuts(unittest.TestCase):

    def setUp(self):
        self.net = build_grid(1, 1, ChannelModel.identity())
        self.top = Network.top_relay(0, 0)
        self.bottom = Network.bottom_relay(0, 0)

    def test_values(self):
        senders = set(self.net.senders)
        self.assertEqual(cut_value(self.net, Cut.from_nodes(senders)), 4.0)
        self.assertEqual(cut_value(self.net, Cut.from_nodes(senders | {self.top})), 3.0)
        self.assertEqual(cut_value(self.net, Cut.from_nodes(senders | {self.top, self.bottom})), 4.0)

    def test_invalid_cuts(self):
        with self.assertRaises(InvalidCutError):
            cut_value(self.net, Cut.from_nodes([self.net.senders[0]]))
        with self.assertRaises(InvalidCutError):
            cut_value(self.net, Cut.from_nodes(set(self.net.senders) | {self.net.receivers[0]}))
        with self.assertRaises(InvalidCutError):
            Cut.from_nodes(set(self.net.senders) | {NodeId(NodeRole.RELAY_TOP, 5, 5)}).validate(self.net)


if __name__ == "__main__":
    unittest.main()
