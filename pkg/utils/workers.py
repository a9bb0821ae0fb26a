import os
from typing import Union

from .consts import WORKERS_ENV_VAR
from .errors import ConfigError


def resolve_workers(max_workers: Union[int, str, None] = None) -> int:
    """Turn a worker setting into a thread count.

    ``None`` falls back to the environment and then to a single worker;
    ``"auto"`` uses half of the usable CPUs.
    """
    if max_workers is None:
        max_workers = os.getenv(WORKERS_ENV_VAR, 1)
    if max_workers == "auto":
        try:
            usable_cpu_count = len(os.sched_getaffinity(0)) // 2
        except AttributeError:
            import multiprocessing

            usable_cpu_count = multiprocessing.cpu_count() // 2
        return max(1, usable_cpu_count)
    try:
        workers = int(max_workers)
    except ValueError as e:
        raise ConfigError(f"workers must be 'auto' or a positive integer, got '{max_workers}'") from e
    if workers < 1:
        raise ConfigError(f"workers must be positive, got {workers}")
    return workers
