"""
Worker pool management for the long-running searches
"""

import logging
import multiprocessing
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence

logger = logging.getLogger(__name__)

# sentinel for "no unit has found a witness yet"
NO_HIT = 2 ** 62


@dataclass
class SearchProgress:
    """Snapshot handed to the progress callback"""
    timestamp: float
    label: str
    done: int
    total: int
    nodes: int


class SearchManager:
    """Owns the process pool; results always come back in task order"""

    def __init__(self, jobs: int = 1, progress_callback: Optional[Callable] = None,
                 progress_interval_s: float = 10.0):
        self.jobs = max(1, int(jobs))
        self.progress_callback = progress_callback or self._log_progress
        self.progress_interval_s = progress_interval_s
        self.pool = None
        self._last_report = 0.0

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()

    @staticmethod
    def _log_progress(progress: SearchProgress):
        logger.info(f"{progress.label}: {progress.done}/{progress.total} units, "
                    f"{progress.nodes} nodes")

    def new_flag(self, value: int = NO_HIT):
        """Shared integer the workers use to publish the lowest unit with a witness"""
        return multiprocessing.Value("q", value)

    def map_ordered(self, fn: Callable[[Any], Any], tasks: Sequence[Any],
                    initializer: Optional[Callable] = None,
                    initargs: Iterable[Any] = ()) -> Iterator[Any]:
        """Yield fn(task) for every task, in order"""
        if self.jobs == 1 or len(tasks) <= 1:
            if initializer:
                initializer(*initargs)
            for task in tasks:
                yield fn(task)
            return
        self.stop()
        self.pool = multiprocessing.Pool(self.jobs, initializer=initializer, initargs=tuple(initargs))
        try:
            for result in self.pool.imap(fn, tasks, chunksize=1):
                yield result
        finally:
            self.stop()

    def report(self, label: str, done: int, total: int, nodes: int, force: bool = False):
        """Forward progress, at most once per progress interval"""
        now = time.time()
        if not force and now - self._last_report < self.progress_interval_s:
            return
        self._last_report = now
        self.progress_callback(SearchProgress(timestamp=now, label=label, done=done,
                                              total=total, nodes=nodes))

    def stop(self):
        """Tear down the pool, abandoning unfinished tasks"""
        if self.pool is not None:
            self.pool.terminate()
            self.pool.join()
            self.pool = None
