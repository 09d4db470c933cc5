"""
Derived quantities: rate reports, crossing points, gap sweeps and the
threshold grid of the assisted erasure strategy.
"""
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .channels import ChannelKind, ChannelModel, ree_edge
from .exceptions import ConfigurationError, NoCrossingError
from .rates import depol_rates, erasure_rates
from .rates.erasure_rates import ExponentMode
from .rates.quantum_bound import closed_form_bound, multipath_bound
from .settings import resolve
from .sim.erasure_sim import simulate
from .sim.strategies import make_strategy
from .topology import build_grid

logger = logging.getLogger(__name__)

CSV_HEADER = ("param", "R_Q", "R_C", "R_C_assisted", "gap", "gap_assisted")


def format_float(value: Optional[float], digits: Optional[int] = None) -> str:
    """Locale independent float text with ``digits`` significant digits."""
    digits = int(resolve(digits, "output.DEFAULT", "float_digits"))
    if value is None or math.isnan(value):
        return "nan"
    return f"{value:.{digits}g}"


# RATES
def _as_mode(mode: Union[str, ExponentMode]) -> ExponentMode:
    try:
        return ExponentMode(mode)
    except ValueError:
        raise ConfigurationError(f"Unknown exponent mode: {mode}")


@dataclass(frozen=True)
class RateConfig:
    """What to evaluate: a channel family on an ``nx`` by ``ny`` grid."""

    channel: ChannelKind = ChannelKind.ERASURE
    nx: int = 1
    ny: int = 1
    asymptotic: bool = False
    exponent_mode: ExponentMode = ExponentMode.NY_CORRECTED
    joint_mode: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "channel", ChannelKind(self.channel))
        object.__setattr__(self, "exponent_mode", _as_mode(self.exponent_mode))
        if self.nx < 1 or self.ny < 1:
            raise ConfigurationError(f"Grid size must be at least 1x1, got {self.nx}x{self.ny}")
        if self.channel is ChannelKind.DEPOLARIZING and self.ny != 1 and not self.asymptotic:
            raise ConfigurationError("Depolarizing rates are only defined for a single row (ny = 1).")

    def to_dict(self) -> dict:
        return {
            "channel": self.channel.value,
            "nx": self.nx,
            "ny": self.ny,
            "asymptotic": self.asymptotic,
            "exponent_mode": self.exponent_mode.value,
            "joint_mode": self.joint_mode,
        }


class RateEntry(NamedTuple):
    value: float
    method: str


@dataclass(frozen=True)
class RateReport:
    """Rates at one parameter value, each tagged with how it was obtained."""

    config: RateConfig
    param: float
    entries: Dict[str, RateEntry] = field(default_factory=dict)

    def _value(self, name: str) -> float:
        entry = self.entries.get(name)
        return float("nan") if entry is None else entry.value

    @property
    def r_q(self) -> float:
        return self._value("R_Q")

    @property
    def r_c(self) -> float:
        return self._value("R_C")

    @property
    def r_c_assisted(self) -> float:
        return self._value("R_C_assisted")

    def to_dict(self) -> dict:
        results = {
            name: {"value": None if math.isnan(e.value) else e.value, "method": e.method}
            for name, e in self.entries.items()
        }
        return {"config": dict(self.config.to_dict(), param=self.param), "results": results}


def rate_report(config: RateConfig, param: float = 0.0, maxflow: bool = True) -> RateReport:
    """
    Quantum bound and classical rates of one configuration.

    Parameters
    ----------
    config : RateConfig
        Channel family and grid.
    param : float
        Channel parameter, ignored for the identity channel.
    maxflow : bool
        Also cross-check the bound with max-flow on the built grid.

    Raises
    ------
    DomainError
        If ``param`` is not a probability.
    ConfigurationError
        On an unsupported configuration.

    Returns
    -------
    RateReport
        Entries R_Q (and R_Q_maxflow), R_C and, where a closed form
        exists, R_C_assisted.
    """
    ch = ChannelModel.from_kind(config.channel, param)
    nx, ny = config.nx, config.ny
    entries: Dict[str, RateEntry] = {}

    if config.asymptotic:
        entries["R_Q"] = RateEntry(2 * ree_edge(ch), "limit")
    else:
        entries["R_Q"] = RateEntry(closed_form_bound(nx, ny, ch), "closed-form")
        if maxflow:
            bound = multipath_bound(build_grid(nx, ny, ch))
            entries["R_Q_maxflow"] = RateEntry(bound.per_receiver, "max-flow")

    if ch.kind is ChannelKind.DEPOLARIZING:
        if config.asymptotic:
            entries["R_C"] = RateEntry(depol_rates.asymptotic_rate_depol(ch.param), "blahut-arimoto limit")
        else:
            method = "blahut-arimoto joint-input" if config.joint_mode else "blahut-arimoto"
            entries["R_C"] = RateEntry(
                depol_rates.rate_parallel_depol(nx, ch.param, joint_mode=config.joint_mode), method
            )
        return RateReport(config, ch.param, entries)

    eps = ch.param  # identity behaves as erasure(0)
    if config.asymptotic:
        limits = erasure_rates.asymptotic_rates(eps)
        entries["R_C"] = RateEntry(limits.classical, "limit")
        entries["R_C_assisted"] = RateEntry(limits.assisted, "limit")
        entries["R_C_assisted_strict"] = RateEntry(erasure_rates.asymptotic_assisted_strict(eps), "limit")
    elif ny == 1:
        entries["R_C"] = RateEntry(erasure_rates.rate_parallel(nx, eps), "closed-form")
        entries["R_C_assisted"] = RateEntry(erasure_rates.rate_parallel_assisted(nx, eps), "closed-form")
        if nx > 1:
            entries["R_C_assisted_strict"] = RateEntry(
                erasure_rates.rate_parallel_assisted_strict(nx, eps), "closed-form"
            )
    elif nx == 1:
        entries["R_C"] = RateEntry(erasure_rates.rate_series(ny, eps), "closed-form")
    else:
        entries["R_C"] = RateEntry(
            erasure_rates.rate_grid(nx, ny, eps, config.exponent_mode),
            f"closed-form {config.exponent_mode.value}",
        )
    return RateReport(config, eps, entries)


# CROSSINGS
@dataclass(frozen=True)
class CrossingPoint:
    """Noise value where a classical rate meets the quantum bound."""

    value: float
    bracket: Tuple[float, float]
    achieved_gap_sign_change: bool
    method: str = "closed-form"
    residual: float = 0.0
    error: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "bracket": list(self.bracket),
            "achieved_gap_sign_change": self.achieved_gap_sign_change,
            "method": self.method,
            "residual": self.residual,
            "error": self.error,
        }


def _bisect(diff: Callable[[float], float], lo: float, hi: float, tol: float) -> Tuple[float, float, float, float]:
    """Shrink a sign-changing bracket to width ``tol``, returns (lo, hi, d_lo, d_hi)."""
    d_lo, d_hi = diff(lo), diff(hi)
    if not d_lo * d_hi < 0:
        raise NoCrossingError(
            f"rate - bound does not change sign on [{lo}, {hi}]: {d_lo:.6g}, {d_hi:.6g}",
            diffs=(d_lo, d_hi),
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        d_mid = diff(mid)
        logger.debug("Bisection [%g, %g] mid %g diff %.6g", lo, hi, mid, d_mid)
        if d_mid == 0.0:
            return mid, mid, 0.0, 0.0
        if (d_mid > 0) == (d_lo > 0):
            lo, d_lo = mid, d_mid
        else:
            hi, d_hi = mid, d_mid
    return lo, hi, d_lo, d_hi


def find_crossing(
    rate_fn: Callable[[float], float],
    bound_fn: Callable[[float], float],
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    tol: Optional[float] = None,
) -> CrossingPoint:
    """
    Bisection for the noise value where ``rate_fn`` equals ``bound_fn``.

    Parameters
    ----------
    rate_fn, bound_fn : Callable
        Functions of the noise parameter.
    lo, hi : float, optional
        The bracket, defaults from the ``crossing`` settings.
    tol : float, optional
        Final bracket width, defaults from the ``crossing`` settings.

    Raises
    ------
    NoCrossingError
        If the difference has the same sign (or is zero) at both ends.

    Returns
    -------
    CrossingPoint
        Midpoint of the final bracket.
    """
    lo = float(resolve(lo, "crossing.DEFAULT", "lo"))
    hi = float(resolve(hi, "crossing.DEFAULT", "hi"))
    tol = float(resolve(tol, "crossing.DEFAULT", "tol"))
    if not lo < hi:
        raise ConfigurationError(f"Empty bracket [{lo}, {hi}]")

    def diff(x: float) -> float:
        return rate_fn(x) - bound_fn(x)

    a, b, _, _ = _bisect(diff, lo, hi, tol)
    value = 0.5 * (a + b)
    return CrossingPoint(value, (lo, hi), True, "closed-form", diff(value))


def _erasure_bound(nx: int, ny: int) -> Callable[[float], float]:
    return lambda eps: closed_form_bound(nx, ny, ChannelModel.erasure(eps))


def single_block_thresholds(tol: Optional[float] = None) -> Tuple[CrossingPoint, CrossingPoint]:
    """Crossings of the unassisted and assisted single-block rates with the bound."""
    bound = _erasure_bound(1, 1)
    eta = find_crossing(erasure_rates.rate_single, bound, tol=tol)
    eta_prime = find_crossing(erasure_rates.rate_single_assisted, bound, tol=tol)
    return eta, eta_prime


def mc_crossing(
    nx: int,
    ny: int,
    strategy: str = "cc",
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    tol: Optional[float] = None,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> CrossingPoint:
    """
    Crossing of a simulated erasure rate with the quantum bound.

    Every evaluation reuses the same seed, so neighbouring noise values see
    common random numbers.

    Raises
    ------
    NoCrossingError
        If the bracket ends do not differ in sign by more than four standard
        errors; the differences are attached.

    Returns
    -------
    CrossingPoint
        The crossing with an error bar in noise units.
    """
    lo = float(resolve(lo, "crossing.monte_carlo", "lo"))
    hi = float(resolve(hi, "crossing.monte_carlo", "hi"))
    tol = float(resolve(tol, "crossing.monte_carlo", "tol"))
    trials = int(resolve(trials, "crossing.monte_carlo", "trials"))
    seed = int(resolve(seed, "simulation.DEFAULT", "seed"))
    chosen = make_strategy(strategy)
    bound = _erasure_bound(nx, ny)
    stderrs: Dict[float, float] = {}
    diffs: Dict[float, float] = {}

    def diff(eps: float) -> float:
        if eps in diffs:
            return diffs[eps]
        net = build_grid(nx, ny, ChannelModel.erasure(eps))
        estimate = simulate(net, chosen, eps, trials=trials, seed=seed, workers=workers)
        stderrs[eps] = estimate.stderr
        diffs[eps] = estimate.mean - bound(eps)
        return diffs[eps]

    for end in (lo, hi):
        d_end = diff(end)
        if abs(d_end) <= 4 * stderrs[end]:
            raise NoCrossingError(
                f"Simulated gap at eps={end} is {d_end:.4g} +- {stderrs[end]:.2g}, "
                "too noisy to bracket a crossing",
                diffs=(end, d_end, stderrs[end]),
            )

    a, b, d_a, d_b = _bisect(diff, lo, hi, tol)
    value = 0.5 * (a + b)
    slope = (d_b - d_a) / (b - a) if b > a else 0.0
    spread = max(stderrs.get(a, 0.0), stderrs.get(b, 0.0))
    error = spread / abs(slope) if slope else b - a
    return CrossingPoint(
        value, (lo, hi), True, "monte-carlo", 0.5 * (d_a + d_b), max(error, 0.5 * (b - a))
    )


# SWEEPS
class SweepRow(NamedTuple):
    param: float
    r_q: float
    r_c: float
    r_c_assisted: float
    gap: float
    gap_assisted: float


@dataclass(frozen=True)
class SweepTable:
    """Rates and gaps along a strictly increasing parameter grid."""

    config: dict
    rows: Tuple[SweepRow, ...]

    def __post_init__(self) -> None:
        params = [row.param for row in self.rows]
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ConfigurationError("Sweep parameters must be strictly increasing.")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows])

    def to_csv(self, digits: Optional[int] = None) -> str:
        """CSV text with a leading ``#`` line holding the configuration."""
        out = io.StringIO()
        out.write("# " + json.dumps(self.config, sort_keys=True) + "\n")
        out.write(",".join(CSV_HEADER) + "\n")
        for row in self.rows:
            out.write(",".join(format_float(v, digits) for v in row) + "\n")
        return out.getvalue()

    def to_dict(self) -> dict:
        results = [
            {k: (None if math.isnan(v) else v) for k, v in zip(CSV_HEADER, row)}
            for row in self.rows
        ]
        return {"config": self.config, "results": results}


def param_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid lo, lo+step, ..., hi (hi included when it is on the grid)."""
    if step <= 0 or hi < lo:
        raise ConfigurationError(f"Empty parameter range {lo}:{hi}:{step}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(n), 12)


def gap_sweep(config: RateConfig, grid: Sequence[float]) -> SweepTable:
    """
    Rates and gaps over a parameter grid.

    Raises
    ------
    ConfigurationError
        For an empty grid or the identity channel, which has no parameter.
    """
    grid = [float(x) for x in grid]
    if not grid:
        raise ConfigurationError("The parameter grid is empty.")
    if config.channel is ChannelKind.IDENTITY:
        raise ConfigurationError("The identity channel has no parameter to sweep.")

    rows = []
    for param in grid:
        report = rate_report(config, param, maxflow=False)
        r_q, r_c, r_a = report.r_q, report.r_c, report.r_c_assisted
        rows.append(SweepRow(param, r_q, r_c, r_a, r_c - r_q, r_a - r_q))
    return SweepTable(config.to_dict(), tuple(rows))


class MinGapRow(NamedTuple):
    nx: int
    p: float
    min_gap: float


def min_gap_vs_nx(p_grid: Sequence[float], nx_list: Sequence[int]) -> List[MinGapRow]:
    """Minimum over ``p_grid`` of the depolarizing row gap R_C - R_Q, per nx."""
    if len(p_grid) == 0 or len(nx_list) == 0:
        raise ConfigurationError("Empty p grid or nx list.")
    rows = []
    for nx in nx_list:
        gaps = [
            depol_rates.rate_parallel_depol(nx, p)
            - closed_form_bound(nx, 1, ChannelModel.depolarizing(p))
            for p in p_grid
        ]
        k = int(np.argmin(gaps))
        rows.append(MinGapRow(int(nx), float(p_grid[k]), float(gaps[k])))
    return rows


def erasure_gap_vs_nx(
    nx_list: Sequence[int], thresholds: Optional[Tuple[CrossingPoint, CrossingPoint]] = None
) -> Dict[str, List[float]]:
    """
    Erasure row gaps against nx at three fixed noise values.

    ``assisted_0`` and ``assisted_half_eta_prime`` are R~_C - R_Q at eps = 0
    and eta'/2, ``unassisted_half_eta`` is R_C - R_Q at eta/2.
    """
    if len(nx_list) == 0:
        raise ConfigurationError("Empty nx list.")
    eta, eta_prime = thresholds or single_block_thresholds()

    def gap(rate, nx, eps):
        return rate(nx, eps) - closed_form_bound(nx, 1, ChannelModel.erasure(eps))

    return {
        "assisted_0": [gap(erasure_rates.rate_parallel_assisted, nx, 0.0) for nx in nx_list],
        "assisted_half_eta_prime": [
            gap(erasure_rates.rate_parallel_assisted, nx, eta_prime.value / 2) for nx in nx_list
        ],
        "unassisted_half_eta": [gap(erasure_rates.rate_parallel, nx, eta.value / 2) for nx in nx_list],
    }


class TouchPoint(NamedTuple):
    p: float
    gap: float
    capacity: float
    bound: float


def depol_touch_point(p_grid: Optional[Sequence[float]] = None) -> TouchPoint:
    """Where the unbounded-row rate C(INNER) comes closest to the bound 2 REE."""
    if p_grid is None:
        p_grid = np.linspace(0.05, 0.5, 91)
    best = None
    for p in p_grid:
        capacity = depol_rates.asymptotic_rate_depol(float(p))
        bound = 2 * ree_edge(ChannelModel.depolarizing(float(p)))
        candidate = TouchPoint(float(p), abs(capacity - bound), capacity, bound)
        if best is None or candidate.gap < best.gap:
            best = candidate
    return best


# THRESHOLD GRID
@dataclass(frozen=True)
class EtaPrimeGrid:
    """Assisted crossings per grid shape; rows follow ``nx_list``, columns ``ny_list``."""

    nx_list: Tuple[int, ...]
    ny_list: Tuple[int, ...]
    values: np.ndarray
    errors: np.ndarray

    @property
    def relative_increase(self) -> np.ndarray:
        """Increase of every entry over the smallest nx of its column."""
        return self.values / self.values[0] - 1.0

    def to_csv(self, digits: Optional[int] = None) -> str:
        out = io.StringIO()
        out.write("nx,ny,eta_prime,error,relative_increase\n")
        increase = self.relative_increase
        for a, nx in enumerate(self.nx_list):
            for b, ny in enumerate(self.ny_list):
                cells = (self.values[a, b], self.errors[a, b], increase[a, b])
                out.write(f"{nx},{ny}," + ",".join(format_float(v, digits) for v in cells) + "\n")
        return out.getvalue()


def eta_prime_grid(
    nx_list: Sequence[int],
    ny_list: Sequence[int],
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
    workers: Optional[int] = None,
) -> EtaPrimeGrid:
    """
    Crossing of the simulated inter-node-assisted rate with the bound for
    every (nx, ny).

    Parameters
    ----------
    nx_list, ny_list : Sequence[int]
        Grid shapes, ``nx_list`` sorted ascending (the first one is the
        reference of :attr:`EtaPrimeGrid.relative_increase`).
    trials : int, optional
        Trials per evaluation, defaults from ``crossing.eta_grid``.
    seed : int, optional
        Shared seed of every evaluation.
    tol : float, optional
        Bisection width, defaults from ``crossing.eta_grid``.
    workers : int, optional
        Processes per simulation.

    Raises
    ------
    NoCrossingError
        If a cell cannot be bracketed above the simulation noise.

    Returns
    -------
    EtaPrimeGrid
        Crossings and their error bars.
    """
    nx_list = tuple(sorted(int(n) for n in nx_list))
    ny_list = tuple(int(n) for n in ny_list)
    if not nx_list or not ny_list:
        raise ConfigurationError("Empty nx or ny list.")
    trials = int(resolve(trials, "crossing.eta_grid", "trials"))
    tol = float(resolve(tol, "crossing.eta_grid", "tol"))

    values = np.zeros((len(nx_list), len(ny_list)))
    errors = np.zeros_like(values)
    for a, nx in enumerate(nx_list):
        for b, ny in enumerate(ny_list):
            point = mc_crossing(nx, ny, "cc", tol=tol, trials=trials, seed=seed, workers=workers)
            values[a, b], errors[a, b] = point.value, point.error
            logger.info("eta' at %dx%d: %.4f +- %.4f", nx, ny, point.value, point.error)
    return EtaPrimeGrid(nx_list, ny_list, values, errors)
