"""
Achievable classical rates of a row of depolarizing butterfly blocks.

Every edge acts on classical inputs as a BSC with flip probability
``q = p/2``. A receiver sees its own sender's bit over one hop and every
coded parity of its blocks over four hops (both sender legs XOR-ed at the
top relay, the bottleneck and the output leg), so a parity is flipped with
``f = q * q * q * q`` in the cascade sense. The network is split into one
DMC per receiver and the capacities are combined.
"""
import functools
import itertools
import logging
import operator
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from ..channels import cascade_flip, check_probability
from ..exceptions import ConfigurationError
from ..settings import resolve
from ..utils.blahut_arimoto import Dmc, InputDistribution, blahut_arimoto, mutual_information

logger = logging.getLogger(__name__)

_CODED_HOPS = 4

# Output bit = XOR of the selected input bits
_OutputBit = Tuple[int, ...]


class ReceiverArity(str, Enum):
    """Receivers at the row ends see two senders, inner receivers three."""

    END = "end"
    INNER = "inner"


# Per arity: the input bits feeding the direct output followed by the parities
_RAW_OUTPUTS = {
    ReceiverArity.END: ((0,), (0, 1)),
    ReceiverArity.INNER: ((1,), (0, 1), (1, 2)),
}
_N_INPUT_BITS = {ReceiverArity.END: 2, ReceiverArity.INNER: 3}


def _bits(index: int, n: int) -> Tuple[int, ...]:
    """Bits of ``index``, most significant first."""
    return tuple((index >> (n - 1 - k)) & 1 for k in range(n))


def _transition(
    n_in: int, outputs: Sequence[_OutputBit], flips: Sequence[float],
    decode: Optional[Callable[[Tuple[int, ...]], Tuple[int, ...]]] = None,
) -> np.ndarray:
    n_out = len(outputs)
    matrix = np.zeros((2 ** n_in, 2 ** n_out))
    for x in range(2 ** n_in):
        inputs = _bits(x, n_in)
        clean = [functools.reduce(operator.xor, (inputs[k] for k in bit)) for bit in outputs]
        for noise in itertools.product((0, 1), repeat=n_out):
            prob = 1.0
            for flip, err in zip(flips, noise):
                prob *= flip if err else 1.0 - flip
            seen = tuple(c ^ e for c, e in zip(clean, noise))
            if decode is not None:
                seen = decode(seen)
            y = int("".join(map(str, seen)), 2)
            matrix[x, y] += prob
    return matrix


def _decode(seen: Tuple[int, ...]) -> Tuple[int, ...]:
    """Undo the parities with the direct bit."""
    direct = seen[0]
    return (direct,) + tuple(direct ^ parity for parity in seen[1:])


def build_receiver_dmc(arity: ReceiverArity, p: float, decoded: bool = False) -> Dmc:
    """
    Channel from the senders of one receiver to what that receiver observes.

    Parameters
    ----------
    arity : ReceiverArity
        END maps (a_i, a_i+1) to (direct, parity); INNER maps
        (a_i, a_i+1, a_i+2) to (direct, left parity, right parity).
    p : float
        Depolarizing probability of every edge.
    decoded : bool
        Report the parities XOR-ed with the direct bit. This relabels the
        outputs and leaves the capacity unchanged.

    Raises
    ------
    DomainError
        If ``p`` is not a probability.

    Returns
    -------
    Dmc
        The receiver channel, inputs and outputs indexed as bit strings.
    """
    arity = ReceiverArity(arity)
    p = check_probability(p, "p")
    q = p / 2
    coded = cascade_flip(q, _CODED_HOPS)
    outputs = _RAW_OUTPUTS[arity]
    flips = [q] + [coded] * (len(outputs) - 1)
    return Dmc(_transition(_N_INPUT_BITS[arity], outputs, flips, _decode if decoded else None))


@functools.lru_cache(maxsize=4096)
def _capacity(arity: ReceiverArity, p: float, tol: float, max_iter: int) -> float:
    return blahut_arimoto(build_receiver_dmc(arity, p), tol=tol, max_iter=max_iter).capacity


def channel_capacity(
    arity: ReceiverArity, p: float, tol: Optional[float] = None, max_iter: Optional[int] = None
) -> float:
    """Capacity in bits of the END or INNER receiver channel."""
    tol = resolve(tol, "solver.DEFAULT", "tol")
    max_iter = resolve(max_iter, "solver.DEFAULT", "max_iter")
    return _capacity(ReceiverArity(arity), check_probability(p, "p"), tol, int(max_iter))


def _product_input(thetas: Sequence[float]) -> InputDistribution:
    """Joint law of independent bits, P(bit k = 1) = thetas[k]."""
    probs = np.ones(1)
    for theta in thetas:
        probs = np.outer(probs, [1.0 - theta, theta]).ravel()
    return InputDistribution(probs / probs.sum())


def _joint_total(thetas: np.ndarray, end: Dmc, inner: Dmc) -> float:
    """Summed mutual information of every receiver for independent sender bits."""
    last = len(thetas) - 1
    total = mutual_information(_product_input(thetas[:2]), end)
    # The right end receiver listens to (a_nx, a_nx-1) with its own bit first
    total += mutual_information(_product_input(thetas[[last, last - 1]]), end)
    for c in range(1, last):
        total += mutual_information(_product_input(thetas[c - 1:c + 2]), inner)
    return total


def _joint_rate(nx: int, p: float, rounds: int = 3) -> float:
    end = build_receiver_dmc(ReceiverArity.END, p)
    inner = build_receiver_dmc(ReceiverArity.INNER, p)
    thetas = np.full(nx + 1, 0.5)
    best = _joint_total(thetas, end, inner)
    for sweep in range(rounds):
        previous = best
        for c in range(nx + 1):
            def negative(theta, c=c):
                trial = thetas.copy()
                trial[c] = theta
                return -_joint_total(trial, end, inner)

            result = minimize_scalar(negative, bounds=(0.0, 1.0), method="bounded")
            if -result.fun > best:
                thetas[c], best = result.x, -result.fun
        logger.debug("Joint input sweep %d at p=%g: %.12g", sweep, p, best)
        if best - previous < 1e-12:
            break
    return best / (nx + 1)


def rate_parallel_depol(nx: int, p: float, joint_mode: bool = False) -> float:
    """
    Classical rate per use and receiver of a row of ``nx`` depolarizing blocks.

    By default the two end receivers and the ``nx - 1`` inner receivers are
    solved as separate channels and their capacities are averaged. With
    ``joint_mode`` one product input over all ``nx + 1`` senders serves
    every receiver at once; it is optimized by coordinate ascent and never
    exceeds the default.

    Parameters
    ----------
    nx : int
        Blocks in the row.
    p : float
        Depolarizing probability.
    joint_mode : bool
        Use a shared product input distribution.

    Raises
    ------
    ConfigurationError
        If nx < 1.
    DomainError
        If p is not a probability.

    Returns
    -------
    float
        Bits per use per receiver.
    """
    if nx < 1:
        raise ConfigurationError(f"nx must be at least 1, got {nx}")
    p = check_probability(p, "p")
    if joint_mode:
        return _joint_rate(nx, p)
    end = channel_capacity(ReceiverArity.END, p)
    inner = channel_capacity(ReceiverArity.INNER, p) if nx > 1 else 0.0
    return (2 * end + (nx - 1) * inner) / (nx + 1)


def asymptotic_rate_depol(p: float) -> float:
    """Limit of :func:`rate_parallel_depol` for an unbounded row, C(INNER)."""
    return channel_capacity(ReceiverArity.INNER, p)
