"""Chunk scheduler with retry support.

Tasks are spread round-robin over worker slots. A single slot runs inline; more
slots use a process pool. Results always come back in task order so that merged
outputs do not depend on the number of workers.
"""

from __future__ import annotations

import logging
from collections import deque
from concurrent.futures import Executor, Future, ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Deque, Dict, Generic, Iterable, Iterator, List, Sequence, Tuple, TypeVar

logger = logging.getLogger(__name__)


class RetryableError(Exception):
    """Exception indicating a task should be retried."""


P = TypeVar("P")
R = TypeVar("R")


@dataclass
class Task(Generic[P]):
    """Work unit scheduled onto a worker slot."""

    name: str
    payload: P
    attempts: int = 0
    metadata: dict = field(default_factory=dict)


class ChunkScheduler:
    """Round-robin scheduler with retry semantics."""

    def __init__(self, workers: int = 1, *, max_retries: int = 1, processes: bool = True):
        if workers < 1:
            raise ValueError("At least one worker slot is required.")
        self._slots = tuple(range(workers))
        self._max_retries = max_retries
        self._processes = processes

    @property
    def slots(self) -> Tuple[int, ...]:
        return self._slots

    def dispatch(
        self,
        tasks: Iterable[Task[P]],
        worker: Callable[[Task[P], int], R],
    ) -> List[Tuple[Task[P], int, R]]:
        """Run *tasks* using *worker*, distributing across slots.

        Returns list of (task, slot, worker_result) in task order. With more
        than one slot and ``processes`` on, *worker* must be picklable.
        """

        ordered = list(tasks)
        if not self._processes or len(self._slots) == 1 or len(ordered) <= 1:
            return self._dispatch_inline(ordered, worker)
        with ProcessPoolExecutor(max_workers=len(self._slots)) as executor:
            return self._dispatch_pool(ordered, worker, executor)

    def _dispatch_inline(self, tasks: Sequence[Task[P]], worker: Callable[[Task[P], int], R]) -> List[Tuple[Task[P], int, R]]:
        results: Dict[int, Tuple[Task[P], int, R]] = {}
        queue: Deque[Tuple[int, Task[P]]] = deque(enumerate(tasks))
        slot_iter = self._slot_infinite_iterator()

        while queue:
            index, task = queue.popleft()
            slot = next(slot_iter)
            try:
                results[index] = (task, slot, worker(task, slot))
            except RetryableError:
                task.attempts += 1
                if task.attempts > self._max_retries:
                    raise
                logger.warning("Retrying task %s (attempt %d)", task.name, task.attempts)
                queue.append((index, task))
        return [results[index] for index in sorted(results)]

    def _dispatch_pool(
        self,
        tasks: Sequence[Task[P]],
        worker: Callable[[Task[P], int], R],
        executor: Executor,
    ) -> List[Tuple[Task[P], int, R]]:
        slot_iter = self._slot_infinite_iterator()
        pending: Dict[int, Tuple[Task[P], int, Future]] = {}
        for index, task in enumerate(tasks):
            slot = next(slot_iter)
            pending[index] = (task, slot, executor.submit(worker, task, slot))

        results: List[Tuple[Task[P], int, R]] = []
        for index in range(len(tasks)):
            task, slot, future = pending[index]
            while True:
                try:
                    results.append((task, slot, future.result()))
                    break
                except RetryableError:
                    task.attempts += 1
                    if task.attempts > self._max_retries:
                        raise
                    logger.warning("Retrying task %s (attempt %d)", task.name, task.attempts)
                    future = executor.submit(worker, task, slot)
        return results

    def _slot_infinite_iterator(self) -> Iterator[int]:
        while True:
            for slot in self._slots:
                yield slot
