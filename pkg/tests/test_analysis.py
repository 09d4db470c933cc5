import json
import unittest

import numpy as np

from butterfly_gap import analysis
from butterfly_gap.analysis import RateConfig
from butterfly_gap.exceptions import ConfigurationError, NoCrossingError
from butterfly_gap.rates import erasure_rates as er

ETA = 1 - 2 ** -0.25


class TestRateReport(unittest.TestCase):

    def test_identity_block(self):
        report = analysis.rate_report(RateConfig("identity"))
        self.assertAlmostEqual(report.r_q, 1.5, delta=1e-12)
        self.assertAlmostEqual(report.entries["R_Q_maxflow"].value, 1.5, delta=1e-9)
        self.assertEqual(report.r_c, 2.0)

    def test_erasure_block(self):
        report = analysis.rate_report(RateConfig("erasure"), 0.1)
        self.assertAlmostEqual(report.r_q, 1.35, delta=1e-12)
        self.assertAlmostEqual(report.r_c, 1.49049, delta=1e-12)
        self.assertAlmostEqual(report.r_c_assisted, 1.57068, delta=1e-12)
        self.assertEqual(report.entries["R_C"].method, "closed-form")

    def test_depolarizing_block(self):
        report = analysis.rate_report(RateConfig("depolarizing"), 0.7)
        self.assertEqual(report.r_q, 0.0)
        self.assertGreater(report.r_c, 0.0)
        self.assertTrue(np.isnan(report.r_c_assisted))
        self.assertIsNone(report.to_dict()["results"].get("R_C_assisted"))

    def test_grid_and_ladder(self):
        ladder = analysis.rate_report(RateConfig("erasure", 1, 3), 0.1, maxflow=False)
        self.assertEqual(ladder.r_c, er.rate_series(3, 0.1))
        grid = analysis.rate_report(RateConfig("erasure", 3, 2, exponent_mode="as-printed"), 0.1, maxflow=False)
        self.assertEqual(grid.r_c, er.rate_grid(3, 2, 0.1, "as-printed"))
        self.assertEqual(grid.entries["R_C"].method, "closed-form as-printed")

    def test_asymptotic(self):
        report = analysis.rate_report(RateConfig("erasure", asymptotic=True), 0.0)
        self.assertEqual((report.r_q, report.r_c, report.r_c_assisted), (2.0, 3.0, 3.0))
        self.assertEqual(report.entries["R_Q"].method, "limit")

    def test_config_validation(self):
        with self.assertRaises(ConfigurationError):
            RateConfig("depolarizing", 2, 2)
        with self.assertRaises(ConfigurationError):
            RateConfig("erasure", 0, 1)
        with self.assertRaises(ConfigurationError):
            RateConfig("erasure", exponent_mode="sideways")
        self.assertTrue(RateConfig("depolarizing", 2, 2, asymptotic=True).asymptotic)

    def test_to_dict(self):
        record = analysis.rate_report(RateConfig("erasure", 2, 1), 0.2).to_dict()
        self.assertEqual(set(record), {"config", "results"})
        self.assertEqual(record["config"]["param"], 0.2)
        self.assertIn("R_C_assisted_strict", record["results"])
        json.dumps(record)


class TestCrossings(unittest.TestCase):

    def test_eta(self):
        eta, eta_prime = analysis.single_block_thresholds()
        self.assertAlmostEqual(eta.value, ETA, delta=1e-4)
        self.assertAlmostEqual(eta_prime.value, 0.2440, delta=5e-4)
        self.assertTrue(eta.achieved_gap_sign_change)
        self.assertLess(abs(eta.residual), 1e-3)

    def test_no_crossing(self):
        with self.assertRaises(NoCrossingError) as cm:
            analysis.find_crossing(lambda e: 2.0, lambda e: 1.5)
        self.assertEqual(cm.exception.diffs, (0.5, 0.5))

    # Test a bracket above the threshold does not bracket it.
    def test_bracket_without_sign_change(self):
        bound = analysis._erasure_bound(1, 1)
        with self.assertRaises(NoCrossingError):
            analysis.find_crossing(er.rate_single, bound, lo=0.3, hi=0.5)
        with self.assertRaises(ConfigurationError):
            analysis.find_crossing(er.rate_single, bound, lo=0.5, hi=0.3)

    def test_monte_carlo_crossing(self):
        point = analysis.mc_crossing(1, 1, "cc", tol=0.01, trials=20000, seed=3)
        self.assertAlmostEqual(point.value, 0.244, delta=0.02)
        self.assertEqual(point.method, "monte-carlo")
        self.assertGreater(point.error, 0.0)

    def test_eta_prime_grid(self):
        grid = analysis.eta_prime_grid([2, 1], [1, 2], trials=20000, seed=3, tol=0.01)
        self.assertEqual(grid.nx_list, (1, 2))
        self.assertEqual(grid.values.shape, (2, 2))
        self.assertTrue(np.all((grid.values > 0.05) & (grid.values < 0.4)))
        np.testing.assert_array_equal(grid.relative_increase[0], [0.0, 0.0])
        # A second row of blocks lowers the threshold of the single column
        self.assertLess(grid.values[0, 1], grid.values[0, 0])
        lines = grid.to_csv().splitlines()
        self.assertEqual(lines[0], "nx,ny,eta_prime,error,relative_increase")
        self.assertEqual(len(lines), 5)

    # Test the assisted threshold does not drop as blocks are added side by side.
    def test_eta_prime_rises_with_nx(self):
        grid = analysis.eta_prime_grid([1, 2, 3], [2], trials=20000, seed=3, tol=0.01)
        steps = np.diff(grid.values[:, 0])
        slack = 3 * (grid.errors[1:, 0] + grid.errors[:-1, 0])
        self.assertTrue(np.all(steps >= -slack), grid.to_csv())


class TestSweeps(unittest.TestCase):

    def test_param_grid(self):
        grid = analysis.param_grid(0.0, 1.0, 0.01)
        self.assertEqual(len(grid), 101)
        self.assertEqual(grid[-1], 1.0)
        self.assertEqual(len(analysis.param_grid(0.2, 0.2, 0.1)), 1)
        with self.assertRaises(ConfigurationError):
            analysis.param_grid(0.5, 0.1, 0.1)
        with self.assertRaises(ConfigurationError):
            analysis.param_grid(0.0, 1.0, 0.0)

    def test_depolarizing_sweep(self):
        table = analysis.gap_sweep(RateConfig("depolarizing"), analysis.param_grid(0.0, 1.0, 0.01))
        gaps = table.column("gap")
        self.assertEqual(len(gaps), 101)
        self.assertTrue(np.all(gaps[:-1] > 0))
        self.assertAlmostEqual(gaps[-1], 0.0, delta=1e-9)
        self.assertEqual(int(np.argmax(gaps)), 0)
        self.assertAlmostEqual(gaps[0], 0.5, delta=1e-9)

    def test_erasure_sweep_changes_sign_at_eta(self):
        table = analysis.gap_sweep(RateConfig("erasure"), analysis.param_grid(0.0, 0.5, 0.01))
        params, gaps = table.column("param"), table.column("gap")
        self.assertTrue(np.all(gaps[params < ETA] > 0))
        self.assertTrue(np.all(gaps[params > ETA] < 0))
        self.assertTrue(np.all(table.column("gap_assisted") >= gaps))

    def test_csv(self):
        table = analysis.gap_sweep(RateConfig("depolarizing"), [0.0, 0.5])
        lines = table.to_csv().splitlines()
        self.assertTrue(lines[0].startswith("# {"))
        self.assertEqual(json.loads(lines[0][2:])["channel"], "depolarizing")
        self.assertEqual(lines[1], ",".join(analysis.CSV_HEADER))
        self.assertEqual(lines[2].split(",")[:3], ["0", "1.5", "2"])
        self.assertTrue(lines[2].endswith("nan"))

    def test_invalid_sweeps(self):
        with self.assertRaises(ConfigurationError):
            analysis.gap_sweep(RateConfig("erasure"), [])
        with self.assertRaises(ConfigurationError):
            analysis.gap_sweep(RateConfig("identity"), [0.0])
        with self.assertRaises(ConfigurationError):
            analysis.gap_sweep(RateConfig("erasure"), [0.2, 0.1])

    def test_format_float(self):
        self.assertEqual(analysis.format_float(1.4904900000000001), "1.49049")
        self.assertEqual(analysis.format_float(float("nan")), "nan")
        self.assertEqual(analysis.format_float(0.123456, digits=3), "0.123")


class TestGapVsSize(unittest.TestCase):

    def test_min_gap(self):
        rows = analysis.min_gap_vs_nx(np.linspace(0, 1, 21), [1, 2, 3])
        self.assertEqual([row.nx for row in rows], [1, 2, 3])
        for row in rows:
            self.assertGreaterEqual(row.min_gap, -1e-12)
        with self.assertRaises(ConfigurationError):
            analysis.min_gap_vs_nx([], [1])

    def test_erasure_gaps(self):
        nx_list = [1, 2, 4, 8, 16]
        gaps = analysis.erasure_gap_vs_nx(nx_list)
        for nx, gap in zip(nx_list, gaps["assisted_0"]):
            self.assertAlmostEqual(gap, 1 - 1 / (nx + 1), delta=1e-12)
        for key in ("assisted_half_eta_prime", "unassisted_half_eta"):
            self.assertTrue(all(g > 0 for g in gaps[key]))
            self.assertEqual(gaps[key], sorted(gaps[key]))

    def test_touch_point(self):
        touch = analysis.depol_touch_point()
        self.assertGreaterEqual(touch.p, 0.1)
        self.assertLessEqual(touch.p, 0.3)
        self.assertLess(touch.gap, 0.05)


if __name__ == "__main__":
    unittest.main()
