"""
Monte Carlo and exact evaluation of strategies on erasure grids.

Trials are grouped in chunks of ``chunk_size``. Chunk ``k`` draws a
``(rows, edges)`` uniform matrix from
``default_rng(SeedSequence(seed, spawn_key=(k,)))`` and an edge is alive when
its uniform is at least ``eps``. Trial ``i`` is therefore fixed by the seed,
the chunk size and ``i`` alone, chunks can run in any order or process, and
the integer bit totals make the aggregate exact.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..channels import check_probability
from ..exceptions import ConfigurationError, SampleMismatchError, catch_remote_exceptions
from ..settings import resolve
from ..topology import Network
from ..utils.workers import run_tasks
from .base_classes import BaseStrategy
from .strategies import make_strategy

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EdgeSample:
    """Alive flags of a batch of trials, shape (trials, edges) in canonical edge order."""

    alive: np.ndarray

    def __post_init__(self) -> None:
        alive = np.atleast_2d(np.asarray(self.alive, dtype=bool))
        if alive.ndim != 2:
            raise SampleMismatchError(f"Edge samples are 1 or 2 dimensional, got {alive.ndim}")
        object.__setattr__(self, "alive", alive)

    @property
    def n_trials(self) -> int:
        return self.alive.shape[0]

    @property
    def n_edges(self) -> int:
        return self.alive.shape[1]


@dataclass(frozen=True)
class RateEstimate:
    """Monte Carlo rate per use and receiver."""

    mean: float
    stderr: float
    trials: int
    seed: int
    config: dict = field(default_factory=dict, compare=False)

    def within(self, value: float, n_sigma: float = 4.0) -> bool:
        """Whether ``value`` lies within ``n_sigma`` standard errors of the mean."""
        return abs(self.mean - value) <= n_sigma * self.stderr

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "trials": self.trials,
            "seed": self.seed,
            "config": dict(self.config),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def sample_edges(
    net: Network, eps: float, stream: np.random.Generator, trials: int = 1
) -> EdgeSample:
    """
    Independent alive flags, P(alive) = 1 - eps, for ``trials`` uses of ``net``.

    Parameters
    ----------
    net : Network
        The network, edges in canonical order.
    eps : float
        Erasure probability.
    stream : np.random.Generator
        The random stream, consumed row by row.
    trials : int
        Number of network uses.

    Returns
    -------
    EdgeSample
        The sampled edge states.
    """
    eps = check_probability(eps, "eps")
    return EdgeSample(stream.random((trials, net.n_edges)) >= eps)


def deliverable_bits(net: Network, sample: EdgeSample, strategy: BaseStrategy) -> np.ndarray:
    """
    Novel bits every receiver decodes with certainty.

    Parameters
    ----------
    net : Network
        The grid the sample was drawn on.
    sample : EdgeSample
        Edge states.
    strategy : BaseStrategy
        The routing and coding strategy.

    Raises
    ------
    SampleMismatchError
        If the sample has a different number of edges than ``net``.
    StrategyTopologyError
        If the strategy cannot run on ``net``.

    Returns
    -------
    np.ndarray
        Integer counts of shape (trials, receivers).
    """
    if sample.n_edges != net.n_edges:
        raise SampleMismatchError(
            f"Sample has {sample.n_edges} edges, {net!r} has {net.n_edges}"
        )
    return strategy.deliverable_bits(net, sample.alive)


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


@catch_remote_exceptions
def _run_chunk(task: Tuple[Network, str, float, int, int, int]) -> Tuple[int, int]:
    """Sum and sum of squares of the per-trial bit totals of one chunk."""
    net, kind, eps, seed, chunk, rows = task
    sample = sample_edges(net, eps, _chunk_rng(seed, chunk), rows)
    totals = deliverable_bits(net, sample, make_strategy(kind)).sum(axis=1)
    return int(totals.sum()), int(np.square(totals).sum())


def simulate(
    net: Network,
    strategy: BaseStrategy,
    eps: float,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> RateEstimate:
    """
    Monte Carlo estimate of a strategy's rate per use and receiver.

    Parameters
    ----------
    net : Network
        The grid.
    strategy : BaseStrategy
        The routing and coding strategy.
    eps : float
        Erasure probability of every edge.
    trials : int, optional
        Network uses, defaults to the ``simulation`` settings.
    seed : int, optional
        Root seed, defaults to the ``simulation`` settings.
    workers : int, optional
        Processes to spread the chunks over; the result does not depend on it.
    chunk_size : int, optional
        Trials per random stream, part of the reproducibility key.

    Raises
    ------
    ConfigurationError
        If trials or chunk_size is smaller than 1.
    StrategyTopologyError
        If the strategy cannot run on ``net``.

    Returns
    -------
    RateEstimate
        Mean, standard error, trials, seed and the run configuration.
    """
    eps = check_probability(eps, "eps")
    trials = int(resolve(trials, "simulation.DEFAULT", "trials"))
    seed = int(resolve(seed, "simulation.DEFAULT", "seed"))
    workers = int(resolve(workers, "simulation.DEFAULT", "workers"))
    chunk_size = int(resolve(chunk_size, "simulation.DEFAULT", "chunk_size"))
    if trials < 1 or chunk_size < 1:
        raise ConfigurationError(f"trials and chunk_size must be positive, got {trials}, {chunk_size}")
    strategy.check_topology(net)

    n_chunks = math.ceil(trials / chunk_size)
    tasks = [
        (net, strategy.name, eps, seed, k, min(chunk_size, trials - k * chunk_size))
        for k in range(n_chunks)
    ]
    logger.debug("Simulating %r with %s at eps=%g: %d trials in %d chunks", net, strategy.name, eps, trials, n_chunks)
    sums = run_tasks(_run_chunk, tasks, workers)
    total = sum(s for s, _ in sums)
    total_sq = sum(s2 for _, s2 in sums)

    r = net.r
    mean = total / (trials * r)
    if trials > 1:
        # Exact integer numerator of the sample variance of the per-trial totals
        variance = (trials * total_sq - total * total) / (trials * (trials - 1) * r * r)
        stderr = math.sqrt(max(variance, 0.0) / trials)
    else:
        stderr = 0.0

    config = {
        "nx": net.nx,
        "ny": net.ny,
        "strategy": strategy.name,
        "epsilon": eps,
        "chunk_size": chunk_size,
    }
    return RateEstimate(mean, stderr, trials, seed, config)


def enumerate_exact(
    net: Network, strategy: BaseStrategy, eps: float, max_edges: Optional[int] = None
) -> float:
    """
    Exact expected rate per use and receiver by summing over every edge state.

    Raises
    ------
    ConfigurationError
        If the network has more edges than ``max_edges`` (``simulation`` settings).
    """
    eps = check_probability(eps, "eps")
    max_edges = int(resolve(max_edges, "simulation.DEFAULT", "max_enumeration_edges"))
    n_edges = net.n_edges
    if n_edges > max_edges:
        raise ConfigurationError(
            f"{n_edges} edges, exhaustive enumeration is capped at {max_edges}"
        )

    states = np.arange(2 ** n_edges)[:, None]
    alive = ((states >> np.arange(n_edges)) & 1).astype(bool)
    weights = np.where(alive, 1.0 - eps, eps).prod(axis=1)
    totals = deliverable_bits(net, EdgeSample(alive), strategy).sum(axis=1)
    return math.fsum(weights * totals) / net.r
