import traceback
import functools
import sys


class ButterflyGapError(Exception):
    """Base class for all errors raised by the package."""
    pass


class DomainError(ButterflyGapError, ValueError):
    """Raised when a probability or size is outside its allowed range."""
    pass


class ConfigurationError(ButterflyGapError):
    """Raised when a network, mode or flag combination is not valid."""
    pass


class InvalidCutError(ButterflyGapError):
    """Raised when a cut does not separate the senders from the receivers."""
    pass


class SampleMismatchError(ButterflyGapError):
    """Raised when an edge sample does not belong to the given network."""
    pass


class StrategyTopologyError(ConfigurationError):
    """Raised when a routing strategy cannot run on the given network."""
    pass


class ConvergenceError(ButterflyGapError):
    """Raised when the capacity solver runs out of iterations.

    The best result found so far is available as ``best``.
    """

    def __init__(self, msg: str, best=None):
        super().__init__(msg)
        self.best = best


class NoCrossingError(ButterflyGapError):
    """Raised when the rate and the bound do not change order in a bracket.

    ``diffs`` holds the rate minus bound values at the bracket ends.
    """

    def __init__(self, msg: str, diffs: tuple = ()):
        super().__init__(msg)
        self.diffs = diffs


class RemoteTaskError(ButterflyGapError):
    """Raised in the parent when a worker process task fails."""
    pass


def catch_remote_exceptions(wrapped_function: callable) -> callable:
    """
    Catch and propagate the remote exceptions.

    The function is a wrapper around a worker task to catch the remote exceptions.
    This is usefull for the multiprocessing module, because the traceback of
    an exception raised in a child process is lost when it is pickled.

    Only decorate module level functions, the pool pickles the task by name.

    Parameters
    ----------
    wrapped_function : function
        The function to wrap.

    Raises
    ------
    RemoteTaskError
        The remote exception, with the formatted remote traceback as message.

    Returns
    -------
    function
        The wrapped function.
    """

    @functools.wraps(wrapped_function)
    def new_function(*args, **kwargs):
        try:
            return wrapped_function(*args, **kwargs)

        except Exception:
            raise RemoteTaskError(
                "".join(traceback.format_exception(*sys.exc_info())))

    return new_function
