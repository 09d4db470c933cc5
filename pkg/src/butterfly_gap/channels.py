"""Scalar information theory for the channels that label network edges.

All entropies are in bits. Rates are bits (classical) or qubits (quantum
bound) per channel use.
"""
import functools
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .exceptions import DomainError


FlipProb = float

_DEPOL_REE_CUTOFF = 2.0 / 3.0


class ChannelKind(str, Enum):
    IDENTITY = "identity"
    DEPOLARIZING = "depolarizing"
    ERASURE = "erasure"


def check_probability(x: float, name: str = "probability") -> float:
    """
    Validate a probability and return it as a float.

    Parameters
    ----------
    x : float
        The value to check.
    name : str
        Name used in the error message.

    Raises
    ------
    DomainError
        If ``x`` is not a number in [0, 1].

    Returns
    -------
    float
        The validated value.
    """
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a number, not {x!r}")
    if not 0.0 <= value <= 1.0:  # also rejects nan
        raise DomainError(f"{name} must lie in [0, 1], got {x}")
    return value


@dataclass(frozen=True)
class ChannelModel:
    """An edge channel: identity, depolarizing(p) or erasure(eps).

    Qubit channels only (dimension 2). The identity channel carries no
    parameter and behaves as depolarizing(0) and erasure(0).
    """

    kind: ChannelKind
    param: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ChannelKind(self.kind))
        object.__setattr__(self, "param", check_probability(self.param, "param"))
        if self.kind is ChannelKind.IDENTITY and self.param != 0.0:
            raise DomainError("The identity channel takes no parameter.")

    # DUNDER METHODS
    def __str__(self) -> str:
        if self.kind is ChannelKind.IDENTITY:
            return "identity"
        return f"{self.kind.value}({self.param:g})"

    # CONSTRUCTORS
    @classmethod
    def identity(cls) -> "ChannelModel":
        return cls(ChannelKind.IDENTITY)

    @classmethod
    def depolarizing(cls, p: float) -> "ChannelModel":
        return cls(ChannelKind.DEPOLARIZING, p)

    @classmethod
    def erasure(cls, eps: float) -> "ChannelModel":
        return cls(ChannelKind.ERASURE, eps)

    @classmethod
    def from_kind(cls, kind: Union[str, ChannelKind], param: float = 0.0) -> "ChannelModel":
        """Build a channel from its kind name; identity only accepts param 0."""
        return cls(ChannelKind(kind), param)

    # PROPERTIES
    @property
    def ree(self) -> float:
        """Relative entropy of entanglement of the channel's Choi state."""
        return ree_edge(self)

    @property
    def capacity(self) -> float:
        """Unassisted classical capacity of a single use."""
        return classical_capacity_p2p(self)


def binary_entropy(x: float) -> float:
    """
    Binary Shannon entropy in bits.

    Parameters
    ----------
    x : float
        Probability in [0, 1].

    Raises
    ------
    DomainError
        If ``x`` is outside [0, 1].

    Returns
    -------
    float
        H2(x), with H2(0) = H2(1) = 0.
    """
    x = check_probability(x, "x")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def flip_convolve(a: FlipProb, b: FlipProb) -> FlipProb:
    """Flip probability of two independent flips in cascade (or XOR-ed bits)."""
    a = check_probability(a, "a")
    b = check_probability(b, "b")
    return a * (1.0 - b) + b * (1.0 - a)


def cascade_flip(q: FlipProb, n: int) -> FlipProb:
    """Flip probability after ``n`` hops that each flip with ``q``.

    Folds :func:`flip_convolve`; equals ``(1 - (1 - 2q)^n) / 2``.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return functools.reduce(flip_convolve, [q] * n)


def ree_edge(ch: ChannelModel) -> float:
    """
    Relative entropy of entanglement of a channel, in qubits per use.

    This is the edge weight of the quantum bound. The depolarizing value is
    ``1 - H2(3p/4)`` for p < 2/3 and zero from there on.

    Parameters
    ----------
    ch : ChannelModel
        The edge channel.

    Returns
    -------
    float
        The REE value.
    """
    if ch.kind is ChannelKind.IDENTITY:
        return 1.0
    if ch.kind is ChannelKind.DEPOLARIZING:
        if ch.param >= _DEPOL_REE_CUTOFF:
            return 0.0
        return max(0.0, 1.0 - binary_entropy(0.75 * ch.param))
    return 1.0 - ch.param


def classical_capacity_p2p(ch: ChannelModel) -> float:
    """
    Unassisted classical capacity of one channel use, in bits.

    A depolarizing channel acts on classical inputs as a binary symmetric
    channel with flip probability p/2.

    Parameters
    ----------
    ch : ChannelModel
        The edge channel.

    Returns
    -------
    float
        The capacity.
    """
    if ch.kind is ChannelKind.IDENTITY:
        return 1.0
    if ch.kind is ChannelKind.DEPOLARIZING:
        return 1.0 - binary_entropy(0.5 * ch.param)
    return 1.0 - ch.param
