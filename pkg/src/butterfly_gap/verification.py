"""
Consistency checks between the independent routes to every rate.

Formulas are looked up through their modules when a check runs.
"""
import itertools
import logging
from typing import Callable, List, NamedTuple

import numpy as np

from . import analysis
from .channels import ChannelModel, binary_entropy
from .exceptions import ButterflyGapError
from .rates import depol_rates, erasure_rates, quantum_bound
from .rates.erasure_rates import ExponentMode
from .settings import get_settings
from .sim import erasure_sim, strategies
from .topology import build_grid
from .utils import blahut_arimoto as ba

logger = logging.getLogger(__name__)

_SECTION = "verify.full"


def _setting(key: str):
    return get_settings().get(_SECTION, key)


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _maxflow_vs_closed_form(quick: bool) -> CheckResult:
    sizes = range(1, 3) if quick else range(1, 6)
    channels = [
        ChannelModel.identity(),
        ChannelModel.depolarizing(0.1),
        ChannelModel.depolarizing(0.4),
        ChannelModel.erasure(0.1),
        ChannelModel.erasure(0.5),
    ]
    worst = 0.0
    for nx, ny, ch in itertools.product(sizes, sizes, channels):
        flow = quantum_bound.multipath_bound(build_grid(nx, ny, ch)).per_receiver
        worst = max(worst, abs(flow - quantum_bound.closed_form_bound(nx, ny, ch)))
    return CheckResult("max-flow = closed-form bound", worst <= 1e-9, f"max deviation {worst:.3g}")


def _solver_calibration(quick: bool) -> CheckResult:
    worst = 0.0
    for q in (0.01, 0.11, 0.3, 0.5):
        capacity = ba.blahut_arimoto(ba.Dmc.bsc(q)).capacity
        worst = max(worst, abs(capacity - (1 - binary_entropy(q))))
    for eps in (0.1, 0.3, 0.7):
        capacity = ba.blahut_arimoto(ba.Dmc.bec(eps)).capacity
        worst = max(worst, abs(capacity - (1 - eps)))
    return CheckResult("Blahut-Arimoto on BSC/BEC", worst <= 1e-6, f"max deviation {worst:.3g}")


def _identity_block(quick: bool) -> CheckResult:
    ch = ChannelModel.identity()
    flow = quantum_bound.multipath_bound(build_grid(1, 1, ch)).per_receiver
    closed = quantum_bound.closed_form_bound(1, 1, ch)
    classical = depol_rates.channel_capacity(depol_rates.ReceiverArity.END, 0.0)
    passed = abs(flow - 1.5) <= 1e-9 and abs(closed - 1.5) <= 1e-9 and abs(classical - 2.0) <= 1e-6
    return CheckResult("identity block 1.5 vs 2", passed, f"R_Q={flow:.12g} R_C={classical:.12g}")


def _enumeration(quick: bool) -> CheckResult:
    flood, cc, backup = (strategies.make_strategy(k) for k in ("flood", "cc", "backup"))
    worst = 0.0
    for eps in (0.05, 0.2, 0.5):
        single = build_grid(1, 1, ChannelModel.erasure(eps))
        ladder = build_grid(1, 2, ChannelModel.erasure(eps))
        pairs = [
            (erasure_sim.enumerate_exact(single, flood, eps), erasure_rates.rate_single(eps)),
            (erasure_sim.enumerate_exact(single, cc, eps), erasure_rates.rate_single_assisted(eps)),
            (erasure_sim.enumerate_exact(ladder, backup, eps), erasure_rates.rate_series(2, eps)),
        ]
        worst = max(worst, max(abs(a - b) for a, b in pairs))
    return CheckResult("enumeration = erasure formulas", worst <= 1e-12, f"max deviation {worst:.3g}")


def _thresholds(quick: bool) -> CheckResult:
    eta, eta_prime = analysis.single_block_thresholds()
    passed = 0.1585 <= eta.value <= 0.1595 and 0.2435 <= eta_prime.value <= 0.2445
    return CheckResult("single block eta, eta'", passed, f"eta={eta.value:.5f} eta'={eta_prime.value:.5f}")


def _depol_dominance(quick: bool) -> CheckResult:
    step = 0.05 if quick else 0.01
    table = analysis.gap_sweep(
        analysis.RateConfig(channel="depolarizing"), analysis.param_grid(0.0, 1.0 - step, step)
    )
    gaps = table.column("gap")
    passed = bool(np.all(gaps > 0)) and abs(gaps.max() - 0.5) <= 0.01 and int(np.argmax(gaps)) == 0
    return CheckResult("depolarizing R_C > R_Q for p < 1", passed, f"min gap {gaps.min():.4g}, max {gaps.max():.4g}")


def _asymptotic_gap(quick: bool) -> CheckResult:
    limits = erasure_rates.asymptotic_rates(0.0)
    gap = erasure_rates.rate_parallel_assisted(100, 0.0) - quantum_bound.closed_form_bound(
        100, 1, ChannelModel.identity()
    )
    passed = tuple(limits) == (2.0, 3.0, 3.0) and abs(gap - 1.0) <= 0.02
    return CheckResult("asymptotic erasure gap -> 1", passed, f"limits {tuple(limits)}, gap(100)={gap:.4f}")


def _touch_point(quick: bool) -> CheckResult:
    touch = analysis.depol_touch_point()
    return CheckResult(
        "depolarizing limit touch point", 0.1 <= touch.p <= 0.3,
        f"p={touch.p:.3f} |C(inner) - 2 REE|={touch.gap:.4g}",
    )


def _monte_carlo(quick: bool) -> CheckResult:
    cases = [
        (1, 1, "flood", erasure_rates.rate_single),
        (1, 1, "cc", erasure_rates.rate_single_assisted),
        (3, 1, "flood", lambda eps: erasure_rates.rate_parallel(3, eps)),
        (3, 1, "cc", lambda eps: erasure_rates.rate_parallel_assisted_strict(3, eps)),
        (1, 2, "backup", lambda eps: erasure_rates.rate_series(2, eps)),
        (1, 3, "backup", lambda eps: erasure_rates.rate_series(3, eps)),
    ]
    trials, seed = _setting("mc_trials"), _setting("mc_seed")
    worst = 0.0
    for (nx, ny, kind, formula), eps in itertools.product(cases, (0.05, 0.2, 0.5)):
        net = build_grid(nx, ny, ChannelModel.erasure(eps))
        est = erasure_sim.simulate(net, strategies.make_strategy(kind), eps, trials=trials, seed=seed)
        worst = max(worst, abs(est.mean - formula(eps)) / est.stderr if est.stderr else 0.0)
    return CheckResult("Monte Carlo = erasure formulas", worst <= 4.0, f"max deviation {worst:.2f} stderr")


def _grid_adjudication(quick: bool) -> CheckResult:
    backup = strategies.make_strategy("backup")
    notes, consistent = [], {mode: 0 for mode in ExponentMode}
    cases = list(itertools.product(((3, 2), (2, 3)), (0.1, 0.3)))
    trials, seed = _setting("mc_trials"), _setting("mc_seed")
    for (nx, ny), eps in cases:
        net = build_grid(nx, ny, ChannelModel.erasure(eps))
        est = erasure_sim.simulate(net, backup, eps, trials=trials, seed=seed)
        for mode in ExponentMode:
            z = abs(est.mean - erasure_rates.rate_grid(nx, ny, eps, mode)) / est.stderr
            consistent[mode] += z <= 4.0
            notes.append(f"{nx}x{ny}@{eps} {mode.value}: {z:.1f}")
    matching = [mode.value for mode, hits in consistent.items() if hits == len(cases)]
    detail = f"matching mode {matching or 'none'}; " + ", ".join(notes)
    return CheckResult("grid exponent mode", len(matching) == 1, detail)


def _eta_prime_trends(quick: bool) -> CheckResult:
    grid = analysis.eta_prime_grid(
        _setting("nx_list"),
        sorted(_setting("ny_list")),
        trials=_setting("grid_trials"),
        seed=_setting("mc_seed"),
        tol=_setting("grid_tol"),
    )
    values, errors = grid.values, grid.errors
    # Differences within three combined error bars count as flat
    rising_nx = np.all(np.diff(values, axis=0) >= -3 * (errors[1:] + errors[:-1]))
    falling_ny = np.all(np.diff(values, axis=1) <= 3 * (errors[:, 1:] + errors[:, :-1]))

    increase = grid.relative_increase
    a, b = np.unravel_index(int(np.argmax(increase)), increase.shape)
    target = float(_setting("target_increase"))
    detail = (
        f"non-decreasing in nx: {bool(rising_nx)}, non-increasing in ny: {bool(falling_ny)}; "
        f"max relative increase {increase[a, b]:.3f} at {grid.nx_list[a]}x{grid.ny_list[b]}, "
        f"{'above' if increase[a, b] > target else 'not above'} {target:g}"
    )
    return CheckResult("eta' trends over grid shapes", bool(rising_nx and falling_ny), detail)


_QUICK_CHECKS: List[Callable[[bool], CheckResult]] = [
    _maxflow_vs_closed_form,
    _solver_calibration,
    _identity_block,
    _enumeration,
    _thresholds,
    _depol_dominance,
    _asymptotic_gap,
    _touch_point,
]
_FULL_CHECKS: List[Callable[[bool], CheckResult]] = [_monte_carlo, _grid_adjudication, _eta_prime_trends]


def run_checks(quick: bool = False) -> List[CheckResult]:
    """
    Run the consistency suite.

    Parameters
    ----------
    quick : bool
        Skip the Monte Carlo checks and use smaller grids.

    Returns
    -------
    list of CheckResult
        One result per check; a check that raises is a failure.
    """
    checks = _QUICK_CHECKS if quick else _QUICK_CHECKS + _FULL_CHECKS
    results = []
    for check in checks:
        try:
            result = check(quick)
        except ButterflyGapError as exc:
            result = CheckResult(check.__name__.strip("_").replace("_", " "), False, f"error: {exc}")
        logger.info("%s: %s (%s)", result.name, "ok" if result.passed else "FAILED", result.detail)
        results.append(result)
    return results


def format_report(results: List[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
