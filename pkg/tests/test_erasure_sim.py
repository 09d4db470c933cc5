import itertools
import json
import unittest

import numpy as np

from butterfly_gap.channels import ChannelModel
from butterfly_gap.exceptions import (
    ConfigurationError,
    SampleMismatchError,
    StrategyTopologyError,
)
from butterfly_gap.rates import erasure_rates as er
from butterfly_gap.sim.erasure_sim import (
    EdgeSample,
    _chunk_rng,
    deliverable_bits,
    enumerate_exact,
    sample_edges,
    simulate,
)
from butterfly_gap.sim.strategies import BackupNoCC, FloodCoding, InterNodeCC, make_strategy
from butterfly_gap.topology import LEFT, RIGHT, build_grid


def all_states(n_edges):
    states = np.arange(2 ** n_edges)[:, None]
    return ((states >> np.arange(n_edges)) & 1).astype(bool)


class TestStrategies(unittest.TestCase):

    def setUp(self):
        self.net = build_grid(1, 1, ChannelModel.erasure(0.2))

    def test_make_strategy(self):
        self.assertIsInstance(make_strategy("flood"), FloodCoding)
        self.assertIsInstance(make_strategy("backup"), BackupNoCC)
        self.assertEqual(make_strategy("cc"), InterNodeCC())
        self.assertEqual(make_strategy("cc").name, "cc")
        with self.assertRaises(ConfigurationError):
            make_strategy("teleport")

    def test_noiseless_block(self):
        alive = np.ones((1, self.net.n_edges), dtype=bool)
        bits = deliverable_bits(self.net, EdgeSample(alive), FloodCoding())
        np.testing.assert_array_equal(bits, [[2, 2]])

    def test_failed_side_edge(self):
        alive = np.ones((1, self.net.n_edges), dtype=bool)
        alive[0, self.net.side_edge(0, 0)] = False
        bits = deliverable_bits(self.net, EdgeSample(alive), FloodCoding())
        np.testing.assert_array_equal(bits, [[0, 2]])

    # Test a lone relay input is forwarded raw with inter-node communication.
    def test_lone_input_forwarding(self):
        alive = np.ones((1, self.net.n_edges), dtype=bool)
        alive[0, self.net.in_edge(0, 0, LEFT)] = False
        np.testing.assert_array_equal(deliverable_bits(self.net, EdgeSample(alive), FloodCoding()), [[1, 1]])
        np.testing.assert_array_equal(deliverable_bits(self.net, EdgeSample(alive), InterNodeCC()), [[2, 1]])

    def test_cc_never_worse_than_flood(self):
        for nx in (1, 2):
            net = build_grid(nx, 1, ChannelModel.erasure(0.2))
            sample = EdgeSample(all_states(net.n_edges))
            flood = deliverable_bits(net, sample, FloodCoding())
            cc = deliverable_bits(net, sample, InterNodeCC())
            self.assertTrue(np.all(cc >= flood))

    def test_bit_totals_bounded(self):
        net = build_grid(2, 1, ChannelModel.erasure(0.2))
        totals = deliverable_bits(net, EdgeSample(all_states(net.n_edges)), InterNodeCC()).sum(axis=1)
        self.assertEqual(totals.min(), 0)
        self.assertEqual(totals.max(), 3 * net.nx + 1)

    # Test a stranded bit crosses to the other side when its own output is down.
    def test_cross_side_rescue(self):
        net = build_grid(1, 2, ChannelModel.erasure(0.2))
        alive = np.ones((1, net.n_edges), dtype=bool)
        for edge in (
            net.side_edge(0, 0),
            net.side_edge(1, 0),
            net.in_edge(0, 0, RIGHT),
            net.out_edge(0, 0, LEFT),
        ):
            alive[0, edge] = False
        sample = EdgeSample(alive)
        np.testing.assert_array_equal(deliverable_bits(net, sample, BackupNoCC()), [[0, 0]])
        np.testing.assert_array_equal(deliverable_bits(net, sample, InterNodeCC()), [[1, 1]])

    def test_cc_never_worse_than_backup(self):
        ladder = build_grid(1, 2, ChannelModel.erasure(0.2))
        sample = EdgeSample(all_states(ladder.n_edges))
        cc = deliverable_bits(ladder, sample, InterNodeCC())
        self.assertTrue(np.all(cc >= deliverable_bits(ladder, sample, BackupNoCC())))
        self.assertGreater(cc.sum(), deliverable_bits(ladder, sample, BackupNoCC()).sum())

        grid = build_grid(3, 3, ChannelModel.erasure(0.3))
        sample = sample_edges(grid, 0.3, np.random.default_rng(2), 20000)
        cc = deliverable_bits(grid, sample, InterNodeCC())
        self.assertTrue(np.all(cc >= deliverable_bits(grid, sample, BackupNoCC())))
        self.assertTrue(np.all(cc >= deliverable_bits(grid, sample, FloodCoding())))
        self.assertLessEqual(cc.sum(axis=1).max(), 3 * grid.nx + 1)

    def test_sample_mismatch(self):
        with self.assertRaises(SampleMismatchError):
            deliverable_bits(self.net, EdgeSample(np.ones((2, 13), dtype=bool)), FloodCoding())

    def test_backup_needs_two_rows(self):
        with self.assertRaises(StrategyTopologyError):
            deliverable_bits(self.net, EdgeSample(np.ones((1, 7), dtype=bool)), BackupNoCC())


class TestSampling(unittest.TestCase):

    def test_extremes(self):
        net = build_grid(1, 2, ChannelModel.erasure(0.0))
        rng = np.random.default_rng(0)
        self.assertTrue(sample_edges(net, 0.0, rng, 10).alive.all())
        self.assertFalse(sample_edges(net, 1.0, rng, 10).alive.any())

    def test_alive_fraction(self):
        net = build_grid(1, 1, ChannelModel.erasure(0.3))
        sample = sample_edges(net, 0.3, np.random.default_rng(1), 100000)
        self.assertEqual((sample.n_trials, sample.n_edges), (100000, 7))
        self.assertAlmostEqual(sample.alive.mean(), 0.7, delta=0.005)


class TestEnumeration(unittest.TestCase):

    def test_single_block(self):
        for eps in (0.05, 0.2, 0.5):
            net = build_grid(1, 1, ChannelModel.erasure(eps))
            self.assertAlmostEqual(enumerate_exact(net, FloodCoding(), eps), er.rate_single(eps), delta=1e-12)
            self.assertAlmostEqual(
                enumerate_exact(net, InterNodeCC(), eps), er.rate_single_assisted(eps), delta=1e-12
            )

    def test_parallel_row(self):
        for eps in (0.1, 0.4):
            net = build_grid(2, 1, ChannelModel.erasure(eps))
            self.assertAlmostEqual(enumerate_exact(net, FloodCoding(), eps), er.rate_parallel(2, eps), delta=1e-12)
            self.assertAlmostEqual(
                enumerate_exact(net, InterNodeCC(), eps), er.rate_parallel_assisted_strict(2, eps), delta=1e-12
            )

    def test_ladder(self):
        for eps in (0.05, 0.2, 0.5):
            net = build_grid(1, 2, ChannelModel.erasure(eps))
            self.assertAlmostEqual(enumerate_exact(net, BackupNoCC(), eps), er.rate_series(2, eps), delta=1e-12)
            self.assertAlmostEqual(
                enumerate_exact(net, FloodCoding(), eps), er.rate_series_sideonly(eps, 2), delta=1e-12
            )

    def test_edge_cap(self):
        net = build_grid(2, 2, ChannelModel.erasure(0.1))
        with self.assertRaises(ConfigurationError):
            enumerate_exact(net, FloodCoding(), 0.1)


class TestSimulate(unittest.TestCase):

    def test_within_four_sigma(self):
        cases = [
            (1, 1, "flood", er.rate_single(0.2)),
            (1, 1, "cc", er.rate_single_assisted(0.2)),
            (1, 2, "backup", er.rate_series(2, 0.2)),
        ]
        for nx, ny, kind, expected in cases:
            net = build_grid(nx, ny, ChannelModel.erasure(0.2))
            est = simulate(net, make_strategy(kind), 0.2, trials=100000, seed=11)
            self.assertTrue(est.within(expected), f"{kind} {nx}x{ny}: {est.mean} vs {expected}")

    # Test the ny-corrected grid formula against the simulated backup strategy.
    def test_grid_formula_matches_backup(self):
        for (nx, ny), eps in itertools.product(((3, 2), (2, 3)), (0.1, 0.3)):
            net = build_grid(nx, ny, ChannelModel.erasure(eps))
            est = simulate(net, BackupNoCC(), eps, trials=200000, seed=7)
            self.assertTrue(est.within(er.rate_grid(nx, ny, eps, "ny-corrected")), f"{nx}x{ny} at {eps}")

    def test_reproducible(self):
        net = build_grid(2, 1, ChannelModel.erasure(0.3))
        first = simulate(net, InterNodeCC(), 0.3, trials=5000, seed=42, chunk_size=1000)
        second = simulate(net, InterNodeCC(), 0.3, trials=5000, seed=42, chunk_size=1000)
        self.assertEqual(first, second)
        other = simulate(net, InterNodeCC(), 0.3, trials=5000, seed=43, chunk_size=1000)
        self.assertNotEqual(first.mean, other.mean)

    def test_workers_do_not_change_the_result(self):
        net = build_grid(1, 2, ChannelModel.erasure(0.2))
        serial = simulate(net, BackupNoCC(), 0.2, trials=4000, seed=5, chunk_size=1000, workers=1)
        pooled = simulate(net, BackupNoCC(), 0.2, trials=4000, seed=5, chunk_size=1000, workers=2)
        self.assertEqual(serial.mean, pooled.mean)
        self.assertEqual(serial.stderr, pooled.stderr)

    def test_standard_error(self):
        net = build_grid(1, 1, ChannelModel.erasure(0.2))
        est = simulate(net, FloodCoding(), 0.2, trials=500, seed=3, chunk_size=1000)
        sample = sample_edges(net, 0.2, _chunk_rng(3, 0), 500)
        totals = deliverable_bits(net, sample, FloodCoding()).sum(axis=1)
        self.assertAlmostEqual(est.mean, totals.mean() / net.r, delta=1e-12)
        self.assertAlmostEqual(est.stderr, totals.std(ddof=1) / np.sqrt(500) / net.r, delta=1e-12)

    def test_single_trial(self):
        net = build_grid(1, 1, ChannelModel.erasure(0.2))
        self.assertEqual(simulate(net, FloodCoding(), 0.2, trials=1, seed=1).stderr, 0.0)

    def test_validation(self):
        net = build_grid(1, 1, ChannelModel.erasure(0.2))
        with self.assertRaises(ConfigurationError):
            simulate(net, FloodCoding(), 0.2, trials=0, seed=1)
        with self.assertRaises(StrategyTopologyError):
            simulate(net, BackupNoCC(), 0.2, trials=10, seed=1)

    def test_to_json(self):
        net = build_grid(1, 1, ChannelModel.erasure(0.2))
        record = json.loads(simulate(net, FloodCoding(), 0.2, trials=100, seed=9).to_json())
        self.assertEqual(set(record), {"mean", "stderr", "trials", "seed", "config"})
        self.assertEqual(record["config"]["strategy"], "flood")
        self.assertEqual(record["seed"], 9)


if __name__ == "__main__":
    unittest.main()
