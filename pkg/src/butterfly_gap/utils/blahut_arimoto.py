"""Discrete memoryless channels and the Blahut-Arimoto capacity solver."""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..channels import check_probability
from ..exceptions import ConvergenceError, DomainError
from ..settings import resolve

logger = logging.getLogger(__name__)

_STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dmc:
    """
    A discrete memoryless channel.

    ``transition[x, y]`` is P(y | x); every row is a probability vector.
    """

    transition: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.transition, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] < 2 or matrix.shape[1] < 2:
            raise DomainError(f"A DMC needs at least 2 inputs and 2 outputs, got {matrix.shape}")
        if np.any(matrix < 0) or not np.all(np.isfinite(matrix)):
            raise DomainError("Transition probabilities must be finite and non-negative.")
        if np.any(np.abs(matrix.sum(axis=1) - 1.0) > _STOCHASTIC_TOL):
            raise DomainError("Every row of a DMC transition matrix must sum to 1.")
        matrix.setflags(write=False)
        object.__setattr__(self, "transition", matrix)

    @property
    def n_inputs(self) -> int:
        return self.transition.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.transition.shape[1]

    @classmethod
    def bsc(cls, q: float) -> "Dmc":
        """Binary symmetric channel with flip probability ``q``."""
        q = check_probability(q, "q")
        return cls(np.array([[1 - q, q], [q, 1 - q]]))

    @classmethod
    def bec(cls, eps: float) -> "Dmc":
        """Binary erasure channel, outputs ordered (0, 1, erased)."""
        eps = check_probability(eps, "eps")
        return cls(np.array([[1 - eps, 0.0, eps], [0.0, 1 - eps, eps]]))

    def to_text(self) -> str:
        """One row of P(y | x) per input, space separated."""
        rows = (" ".join(f"{p:.12g}" for p in row) for row in self.transition)
        return "\n".join(rows) + "\n"


@dataclass(frozen=True, eq=False)
class InputDistribution:
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or np.any(probs < 0) or abs(probs.sum() - 1.0) > _STOCHASTIC_TOL:
            raise DomainError("An input distribution is a non-negative vector summing to 1.")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n: int) -> "InputDistribution":
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class CapacityResult:
    capacity: float
    dist: InputDistribution
    iterations: int
    residual: float


def _divergences(probs: np.ndarray, transition: np.ndarray) -> np.ndarray:
    """D(W(.|x) || pW) in bits for every input x."""
    output = probs @ transition
    with np.errstate(divide="ignore"):
        ratio = np.divide(
            transition, output, out=np.ones_like(transition), where=transition > 0
        )
    return np.sum(transition * np.log2(ratio), axis=1)


def mutual_information(dist: InputDistribution, dmc: Dmc) -> float:
    """I(X; Y) in bits for input ``dist`` over ``dmc``."""
    if dist.probs.shape[0] != dmc.n_inputs:
        raise DomainError("Input distribution and channel sizes differ.")
    used = dist.probs > 0
    divergences = _divergences(dist.probs, dmc.transition)
    return float(dist.probs[used] @ divergences[used])


def blahut_arimoto(
    dmc: Dmc, tol: Optional[float] = None, max_iter: Optional[int] = None
) -> CapacityResult:
    """
    Capacity of a DMC by alternating maximization.

    Starts from the uniform input. At every step the capacity is bracketed
    by the mutual information of the current input (lower) and the largest
    per-input divergence (upper); the solver stops when the gap is within
    ``tol``.

    Parameters
    ----------
    dmc : Dmc
        The channel.
    tol : float, optional
        Stopping gap in bits, defaults to the ``solver`` settings.
    max_iter : int, optional
        Iteration cap, defaults to the ``solver`` settings.

    Raises
    ------
    DomainError
        If ``tol`` is not positive.
    ConvergenceError
        If the gap is still above ``tol`` after ``max_iter`` steps; the best
        result is attached.

    Returns
    -------
    CapacityResult
        The capacity (lower estimate), the input distribution, the number of
        iterations and the final gap.
    """
    tol = resolve(tol, "solver.DEFAULT", "tol")
    max_iter = resolve(max_iter, "solver.DEFAULT", "max_iter")
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")

    transition = dmc.transition
    probs = np.full(dmc.n_inputs, 1.0 / dmc.n_inputs)
    lower, gap = 0.0, np.inf
    for iteration in range(1, int(max_iter) + 1):
        divergences = _divergences(probs, transition)
        lower = float(probs @ divergences)
        gap = float(divergences.max()) - lower
        if gap <= tol:
            logger.debug("Blahut-Arimoto converged in %d steps, gap %.3g", iteration, gap)
            return CapacityResult(lower, InputDistribution(probs), iteration, max(gap, 0.0))

        probs = probs * np.exp2(divergences - divergences.max())
        probs /= probs.sum()

    best = CapacityResult(lower, InputDistribution(probs), int(max_iter), gap)
    raise ConvergenceError(
        f"Blahut-Arimoto did not reach gap {tol} in {max_iter} steps (gap {gap:.3g})",
        best=best,
    )
