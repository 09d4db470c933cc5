"""Run independent tasks in background processes.

The task function must live at module level so the pool can pickle it; wrap
it with :func:`~butterfly_gap.exceptions.catch_remote_exceptions` to keep
the remote traceback.
"""
import logging
import multiprocessing as mp
from typing import Any, Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


def run_tasks(func: Callable[[T], Any], tasks: Iterable[T], workers: int = 1) -> List[Any]:
    """
    Map ``func`` over ``tasks`` and return the results in task order.

    Parameters
    ----------
    func : Callable
        A module level function taking one task.
    tasks : Iterable
        The task arguments.
    workers : int
        Number of processes, 1 or less runs everything in this process.

    Returns
    -------
    list
        ``[func(task) for task in tasks]``.
    """
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]

    n_proc = min(int(workers), len(tasks))
    logger.debug("Running %d tasks on %d processes", len(tasks), n_proc)
    with mp.Pool(processes=n_proc) as pool:
        return pool.map(func, tasks)
