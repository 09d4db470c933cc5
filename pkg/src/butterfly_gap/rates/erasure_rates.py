"""
Closed-form achievable classical rates of erasure butterfly networks.

Every rate is in bits per network use per receiver. A bit counts only when
its receiver can decode it with certainty. ``eps`` is the erasure
probability shared by all edges.
"""
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Union

from ..channels import check_probability
from ..exceptions import ConfigurationError


class ExponentMode(str, Enum):
    """How to read the lambda exponent of the third grid term.

    AS_PRINTED uses 2(nx - 1), NY_CORRECTED uses 2(ny - 1). The second one
    reduces to the parallel-row rate at ny = 1.
    """

    AS_PRINTED = "as-printed"
    NY_CORRECTED = "ny-corrected"


@dataclass(frozen=True)
class ErasureConfig:
    nx: int = 1
    ny: int = 1
    epsilon: float = 0.0
    assisted: bool = False

    def __post_init__(self) -> None:
        _check_size(self.nx, self.ny)
        object.__setattr__(self, "epsilon", check_probability(self.epsilon, "epsilon"))


class AsymptoticRates(NamedTuple):
    """Large-row limits of the bound and the rates."""

    quantum: float
    classical: float
    assisted: float


def _check_size(nx: int, ny: int = 1) -> None:
    if nx < 1 or ny < 1:
        raise ConfigurationError(f"Grid size must be at least 1x1, got {nx}x{ny}")


def _backup_gain(eps: float) -> float:
    """Per-block, per-receiver gain of the failure-triggered forwarding."""
    return eps * (1.0 + eps) * (1.0 - eps) ** 3


def rate_single(eps: float) -> float:
    """Single block: the side channel plus the network-coded bit."""
    eps = check_probability(eps, "eps")
    return (1.0 - eps) + (1.0 - eps) ** 5


def rate_single_assisted(eps: float) -> float:
    """Single block with inter-node communication forwarding a lone relay input."""
    eps = check_probability(eps, "eps")
    return rate_single(eps) + _backup_gain(eps)


def rate_parallel(nx: int, eps: float) -> float:
    """One row of ``nx`` blocks; every inner receiver decodes two coded bits."""
    _check_size(nx)
    eps = check_probability(eps, "eps")
    r = nx + 1
    return (1.0 - eps) + 2 * (r - 1) / r * (1.0 - eps) ** 5


def rate_parallel_assisted(nx: int, eps: float) -> float:
    """One row of ``nx`` blocks, each block adding its four backup routes."""
    _check_size(nx)
    eps = check_probability(eps, "eps")
    r = nx + 1
    return rate_parallel(nx, eps) + 2 * (r - 1) / r * _backup_gain(eps)


def rate_parallel_assisted_strict(nx: int, eps: float) -> float:
    """
    Exact inter-node-assisted row rate when duplicates count once.

    An inner receiver sits between two blocks. When its direct edge fails,
    its own bit may arrive raw from one block and unlock the parity of the
    other (gain), or arrive raw from both (counted once, loss). Equal to
    :func:`rate_parallel_assisted` at nx = 1.
    """
    _check_size(nx)
    eps = check_probability(eps, "eps")
    r = nx + 1
    ok = 1.0 - eps
    correction = 2 * eps ** 2 * ok ** 7 - eps ** 3 * ok ** 6
    return rate_parallel_assisted(nx, eps) + (r - 2) / r * correction


def lambda_(eps: float) -> float:
    """Probability that a bit crosses one block on the side edge or the backup route."""
    eps = check_probability(eps, "eps")
    return 1.0 - eps * (1.0 - (1.0 - eps) ** 3)


def rate_series(ny: int, eps: float) -> float:
    """
    Ladder of ``ny`` blocks using the upper bottlenecks as backup routes.

    One side duplicates its bit over the bottleneck of every upper block,
    network coding happens only in the last block.
    """
    _check_size(1, ny)
    eps = check_probability(eps, "eps")
    ok = 1.0 - eps
    lam = lambda_(eps) ** (ny - 1)
    return (ok * lam + ok ** ny) / 2 + ok ** 5 * ok ** (ny - 1) * lam


def rate_series_sideonly(eps: float, ny: int = 2) -> float:
    """
    Ladder that ignores the upper bottlenecks and relays on the side edges.

    Not optimal: :func:`rate_series` is never lower for ny >= 2.
    """
    _check_size(1, ny)
    eps = check_probability(eps, "eps")
    ok = 1.0 - eps
    return ok ** ny + ok ** (2 * ny + 3)


def rate_grid(
    nx: int,
    ny: int,
    eps: float,
    exponent_mode: Union[str, ExponentMode] = ExponentMode.NY_CORRECTED,
) -> float:
    """
    General ``nx`` by ``ny`` grid where every sender but the rightmost uses
    the backup route of the block to its right in the upper rows.

    Parameters
    ----------
    nx : int
        Blocks per row.
    ny : int
        Rows of blocks.
    eps : float
        Erasure probability.
    exponent_mode : ExponentMode or str
        Exponent of lambda in the inner coded term, see :class:`ExponentMode`.

    Raises
    ------
    ConfigurationError
        On a bad grid size or an unknown mode.
    DomainError
        If eps is not a probability.

    Returns
    -------
    float
        The rate per use and receiver.
    """
    _check_size(nx, ny)
    eps = check_probability(eps, "eps")
    try:
        mode = ExponentMode(exponent_mode)
    except ValueError:
        raise ConfigurationError(f"Unknown exponent mode: {exponent_mode}")

    ok = 1.0 - eps
    lam = lambda_(eps)
    inner_exponent = 2 * (nx - 1) if mode is ExponentMode.AS_PRINTED else 2 * (ny - 1)
    total = (
        nx * ok * lam ** (ny - 1)
        + ok ** ny
        + 2 * (nx - 1) * ok ** 5 * lam ** inner_exponent
        + 2 * ok ** 5 * ok ** (ny - 1) * lam ** (ny - 1)
    )
    return total / (nx + 1)


def asymptotic_rates(eps: float) -> AsymptoticRates:
    """Limits of the row bound and rates for an unbounded number of blocks."""
    eps = check_probability(eps, "eps")
    ok = 1.0 - eps
    classical = ok + 2 * ok ** 5
    assisted = classical + 2 * _backup_gain(eps)
    return AsymptoticRates(2 * ok, classical, assisted)


def asymptotic_assisted_strict(eps: float) -> float:
    """Limit of :func:`rate_parallel_assisted_strict` for an unbounded row."""
    eps = check_probability(eps, "eps")
    ok = 1.0 - eps
    return asymptotic_rates(eps).assisted + 2 * eps ** 2 * ok ** 7 - eps ** 3 * ok ** 6
